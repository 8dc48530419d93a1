#include "mvsde/config.hpp"

#include "mvsde/format.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace mvsde {

namespace {

const std::set<std::string> kMeanFieldExperiments = {"distribution_iteration", "delay_mean_oracle"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, const std::string& text) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size()) throw ConfigError(field + ": expected a number, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& field, const std::string& text) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size()) throw ConfigError(field + ": expected an integer, got '" + text + "'");
  return v;
}

std::uint64_t parse_seed(const std::string& text) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (!text.empty() && text.front() == '-') throw std::invalid_argument("negative");
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size()) throw ConfigError("seed: expected an unsigned 64-bit integer, got '" + text + "'");
  return v;
}

std::size_t parse_count(const std::string& field, const std::string& text) {
  const long long v = parse_integer(field, text);
  if (v < 0) throw ConfigError(field + " must be >= 0");
  return static_cast<std::size_t>(v);
}

ExperimentConfig base(const std::string& name) {
  ExperimentConfig c;
  c.experiment = name;
  return c;
}

KeyValues halfline_at_zero() { return {{"type", "normal_cone"}, {"domain", "halfline"}, {"start", "0"}}; }

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "reflected_bm_oracle", "k_variation_stability", "zero_operator_reduction", "monotone_primitives",
      "picard_contraction",  "uniqueness",            "w2_oracle",               "distribution_iteration",
      "delay_mean_oracle",   "continuity",
  };
  return names;
}

ExperimentConfig default_config(const std::string& name) {
  ExperimentConfig c = base(name);
  if (name == "reflected_bm_oracle" || name == "k_variation_stability") {
    c.dt = 1e-3;
    c.r0 = 0.0;
    c.horizon = 1.0;
    c.paths = name == "reflected_bm_oracle" ? 100000 : 20000;
    c.op = halfline_at_zero();
    c.drift = {{"name", "zero"}};
    c.diffusion = {{"name", "constant"}, {"sigma", "1"}};
    c.initial_value = 0.0;
  } else if (name == "zero_operator_reduction") {
    c.dt = 1e-3;
    c.r0 = 0.1;
    c.horizon = 1.0;
    c.paths = 100;
    c.op = {{"type", "zero"}};
    c.drift = {{"name", "linear_delay"}, {"a", "1"}, {"b", "0.5"}};
    c.diffusion = {{"name", "constant"}, {"sigma", "0.5"}};
    c.initial_value = 1.0;
  } else if (name == "monotone_primitives") {
    c.paths = 10000;
    c.dimension = 2;
  } else if (name == "picard_contraction") {
    c.dt = 1e-3;
    c.r0 = 0.1;
    c.horizon = 1.0;
    c.paths = 1000;
    c.n_iters = 8;
    c.op = halfline_at_zero();
    c.drift = {{"name", "linear_delay"}, {"a", "0.5"}, {"b", "0.25"}};
    c.diffusion = {{"name", "constant"}, {"sigma", "0.5"}};
    c.initial_value = 1.0;
  } else if (name == "uniqueness") {
    c.dt = 1e-2;
    c.r0 = 0.1;
    c.horizon = 1.0;
    c.paths = 100;
    c.n_iters = 60;
    c.op = halfline_at_zero();
    c.drift = {{"name", "linear_delay"}, {"a", "1"}, {"b", "0.5"}};
    c.diffusion = {{"name", "constant"}, {"sigma", "0.5"}};
    c.initial_value = 1.0;
  } else if (name == "w2_oracle") {
    c.dt = 0.25;
    c.r0 = 0.75;
    c.horizon = 1.0;
    c.dimension = 2;
    c.paths = 100;
    c.particles = 16;
  } else if (name == "distribution_iteration") {
    c.dt = 1e-2;
    c.r0 = 0.1;
    c.horizon = 1.0;
    c.particles = 256;
    c.n_iters = 9;
    c.op = halfline_at_zero();
    c.drift = {{"name", "mf_linear"}, {"coupling", "1"}, {"functional", "eval_delay"}};
    c.diffusion = {{"name", "constant"}, {"sigma", "0.5"}};
    c.initial_value = 1.0;
    c.initial_spread = 0.25;
  } else if (name == "delay_mean_oracle") {
    c.dt = 1e-2;
    c.r0 = 0.5;
    c.horizon = 1.0;
    c.particles = 10000;
    c.op = {{"type", "zero"}};
    c.drift = {{"name", "mf_linear"}, {"coupling", "0.5"}, {"functional", "eval_delay"}};
    c.diffusion = {{"name", "constant"}, {"sigma", "0.5"}};
    c.initial_value = 1.0;
  } else if (name == "continuity") {
    c.dt = 1e-3;
    c.r0 = 0.1;
    c.horizon = 1.0;
    c.paths = 200;
    c.op = halfline_at_zero();
    c.drift = {{"name", "log_lipschitz"}, {"kappa", "log"}, {"eta", "0.2"}};
    c.diffusion = {{"name", "constant"}, {"sigma", "0.5"}};
    c.initial_value = 0.5;
  } else {
    throw ConfigError("experiment: unknown name '" + name + "'");
  }
  return c;
}

namespace {

using Sections = std::map<std::string, KeyValues>;

Sections read_sections(std::istream& in) {
  static const std::set<std::string> known = {"", "grid", "run", "operator", "drift", "diffusion", "initial"};
  Sections out;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known.count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!out[section].emplace(key, value).second) {
      throw ConfigError(where + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

std::string label(const std::string& section, const std::string& key) {
  return section.empty() ? key : "[" + section + "] " + key;
}

void merge_named(KeyValues& target, const KeyValues& file, const std::string& selector) {
  const auto it = file.find(selector);
  if (it != file.end() && target[selector] != it->second) target = {{selector, it->second}};
  for (const auto& [k, v] : file) target[k] = v;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  const Sections sections = read_sections(in);
  const auto top_it = sections.find("");
  const KeyValues top = top_it == sections.end() ? KeyValues{} : top_it->second;
  const auto exp = top.find("experiment");
  if (exp == top.end()) throw ConfigError("experiment: missing (top-level key before any section)");
  ExperimentConfig cfg = default_config(exp->second);

  for (const auto& [section, values] : sections) {
    for (const auto& [key, value] : values) {
      const std::string field = label(section, key);
      if (section.empty()) {
        if (key == "experiment") continue;
        if (key == "seed") {
          cfg.seed = parse_seed(value);
        } else {
          throw ConfigError(field + ": unknown key");
        }
      } else if (section == "grid") {
        if (key == "dt") {
          cfg.dt = parse_number(field, value);
        } else if (key == "r0") {
          cfg.r0 = parse_number(field, value);
        } else if (key == "T") {
          cfg.horizon = parse_number(field, value);
        } else {
          throw ConfigError(field + ": unknown key");
        }
      } else if (section == "run") {
        if (key == "dimension") {
          cfg.dimension = static_cast<Eigen::Index>(parse_integer(field, value));
        } else if (key == "brownian_dimension") {
          cfg.brownian_dimension = static_cast<Eigen::Index>(parse_integer(field, value));
        } else if (key == "paths") {
          cfg.paths = parse_count(field, value);
        } else if (key == "particles") {
          cfg.particles = parse_count(field, value);
        } else if (key == "n_iters") {
          cfg.n_iters = static_cast<int>(parse_integer(field, value));
        } else if (key == "scheme") {
          try {
            cfg.scheme = parse_scheme(value);
          } catch (const ConfigError& e) {
            throw ConfigError(field + ": " + e.what());
          }
        } else if (key == "membership_tol") {
          cfg.membership_tol = parse_number(field, value);
        } else if (key == "bdg_constant") {
          cfg.bdg_constant = parse_number(field, value);
        } else if (key == "moment_ceiling") {
          cfg.moment_ceiling = parse_number(field, value);
        } else if (key == "export_paths") {
          cfg.export_paths = parse_count(field, value);
        } else {
          throw ConfigError(field + ": unknown key");
        }
      } else if (section == "initial") {
        if (key == "value") {
          cfg.initial_value = parse_number(field, value);
        } else if (key == "spread") {
          cfg.initial_spread = parse_number(field, value);
        } else {
          throw ConfigError(field + ": unknown key");
        }
      }
    }
  }
  if (auto it = sections.find("operator"); it != sections.end()) merge_named(cfg.op, it->second, "type");
  if (auto it = sections.find("drift"); it != sections.end()) merge_named(cfg.drift, it->second, "name");
  if (auto it = sections.find("diffusion"); it != sections.end()) merge_named(cfg.diffusion, it->second, "name");
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

TimeGrid make_grid(const ExperimentConfig& cfg) {
  try {
    return TimeGrid(cfg.dt, cfg.r0, cfg.horizon);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[grid] ") + e.what());
  }
}

namespace {

GraphEnd parse_end(const CoefficientParams& p, const std::string& key) {
  const std::string text = p.text(key, "0");
  if (text == "vertical") return GraphEnd{true, 0.0};
  return GraphEnd{false, parse_number("[operator] " + key, text)};
}

std::vector<GraphVertex> parse_vertices(const std::string& text) {
  std::vector<GraphVertex> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("[operator] vertices: expected 'x:y' pairs");
    out.push_back({parse_number("[operator] vertices", trim(item.substr(0, colon))),
                   parse_number("[operator] vertices", trim(item.substr(colon + 1)))});
  }
  return out;
}

Vector fit(const Vector& v, Eigen::Index d, const std::string& field) {
  if (v.size() == 1 && d > 1) return Vector::Constant(d, v(0));
  if (v.size() != d) throw ConfigError(field + ": expected " + std::to_string(d) + " components");
  return v;
}

}  // namespace

MonotoneOperator make_operator(const KeyValues& section, Eigen::Index d) {
  const CoefficientParams p("operator", section);
  const std::string type = p.text("type", "zero");
  MonotoneOperator op = ZeroOperator{};
  try {
    if (type == "zero") {
      op = ZeroOperator{};
    } else if (type == "normal_cone") {
      const std::string domain = p.text("domain", "halfline");
      if (domain == "halfline") {
        if (d != 1) throw ConfigError("[operator] domain: halfline needs dimension 1");
        op = NormalCone{ConvexDomain::halfline(p.number("start", 0.0))};
      } else if (domain == "box") {
        op = NormalCone{ConvexDomain::box(fit(p.vector("lower", Vector::Zero(1)), d, "[operator] lower"),
                                          fit(p.vector("upper", Vector::Ones(1)), d, "[operator] upper"))};
      } else if (domain == "ball") {
        op = NormalCone{ConvexDomain::ball(fit(p.vector("center", Vector::Zero(1)), d, "[operator] center"),
                                           p.number("radius", 1.0))};
      } else if (domain == "halfspace") {
        Vector def = Vector::Zero(d);
        def(0) = 1.0;
        op = NormalCone{ConvexDomain::halfspace(fit(p.vector("normal", def), d, "[operator] normal"),
                                                p.number("offset", 0.0))};
      } else {
        throw ConfigError("[operator] domain: unknown domain '" + domain + "'");
      }
    } else if (type == "sign") {
      op = MonotoneGraph::sign();
    } else if (type == "affine") {
      op = MonotoneGraph::affine(p.number("slope", 1.0), p.number("intercept", 0.0));
    } else if (type == "graph") {
      op = MonotoneGraph(parse_vertices(p.text("vertices", "0:0")), parse_end(p, "left"), parse_end(p, "right"));
    } else {
      throw ConfigError("[operator] type: unknown operator '" + type + "'");
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[operator] ") + e.what());
  }
  p.require_all_used();
  return op;
}

SolverConfig make_solver_config(const ExperimentConfig& cfg) {
  SolverConfig s{make_grid(cfg), cfg.scheme, make_operator(cfg.op, cfg.dimension), cfg.membership_tol};
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[run] scheme: ") + e.what());
  }
  return s;
}

void validate(const ExperimentConfig& cfg) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
    throw ConfigError("experiment: unknown name '" + cfg.experiment + "'");
  }
  make_grid(cfg);
  if (cfg.dimension < 1) throw ConfigError("[run] dimension must be >= 1");
  if (cfg.brownian_dimension < 1) throw ConfigError("[run] brownian_dimension must be >= 1");
  if (cfg.paths < 1) throw ConfigError("[run] paths must be >= 1");
  if (cfg.particles < 1) throw ConfigError("[run] particles must be >= 1 (N = 0 is not a law)");
  if (cfg.n_iters < 1) throw ConfigError("[run] n_iters must be >= 1");
  if (!(cfg.membership_tol > 0.0)) throw ConfigError("[run] membership_tol must be > 0");
  if (!(cfg.bdg_constant >= 0.0)) throw ConfigError("[run] bdg_constant must be >= 0");
  if (!(cfg.moment_ceiling > 0.0)) throw ConfigError("[run] moment_ceiling must be > 0");
  if (!std::isfinite(cfg.initial_value)) throw ConfigError("[initial] value must be finite");
  if (!(cfg.initial_spread >= 0.0) || !std::isfinite(cfg.initial_spread)) {
    throw ConfigError("[initial] spread must be >= 0");
  }
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  make_solver_config(cfg);

  const auto name_of = [](const KeyValues& kv, const char* key) {
    const auto it = kv.find(key);
    return it == kv.end() ? std::string() : it->second;
  };
  const std::string drift_name = name_of(cfg.drift, "name");
  const std::string diffusion_name = name_of(cfg.diffusion, "name");
  KeyValues drift_params = cfg.drift;
  drift_params.erase("name");
  KeyValues diffusion_params = cfg.diffusion;
  diffusion_params.erase("name");
  if (!is_known_drift(drift_name)) throw ConfigError("[drift] unknown coefficient name '" + drift_name + "'");
  if (!is_known_diffusion(diffusion_name)) {
    throw ConfigError("[diffusion] unknown coefficient name '" + diffusion_name + "'");
  }
  try {
    if (kMeanFieldExperiments.count(cfg.experiment)) {
      make_mean_field_drift(drift_name, CoefficientParams("drift", drift_params), cfg.dimension);
    } else {
      if (drift_name.rfind("mf_", 0) == 0) {
        throw ConfigError("[drift] name: '" + drift_name + "' needs a mean-field experiment");
      }
      make_drift(drift_name, CoefficientParams("drift", drift_params), cfg.dimension);
    }
    make_diffusion(diffusion_name, CoefficientParams("diffusion", diffusion_params), cfg.dimension,
                   cfg.brownian_dimension);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[drift/diffusion] ") + e.what());
  }
}

namespace {

void write_section(std::ostream& out, const std::string& name, const KeyValues& kv, const std::string& selector) {
  out << "\n[" << name << "]\n";
  if (auto it = kv.find(selector); it != kv.end()) out << selector << " = " << it->second << '\n';
  for (const auto& [k, v] : kv) {
    if (k != selector) out << k << " = " << v << '\n';
  }
}

}  // namespace

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  out << "experiment = " << cfg.experiment << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "\n[grid]\n";
  out << "dt = " << format_double(cfg.dt) << '\n';
  out << "r0 = " << format_double(cfg.r0) << '\n';
  out << "T = " << format_double(cfg.horizon) << '\n';
  out << "\n[run]\n";
  out << "dimension = " << cfg.dimension << '\n';
  out << "brownian_dimension = " << cfg.brownian_dimension << '\n';
  out << "paths = " << cfg.paths << '\n';
  out << "particles = " << cfg.particles << '\n';
  out << "n_iters = " << cfg.n_iters << '\n';
  out << "scheme = " << to_string(cfg.scheme) << '\n';
  out << "membership_tol = " << format_double(cfg.membership_tol) << '\n';
  out << "bdg_constant = " << format_double(cfg.bdg_constant) << '\n';
  out << "moment_ceiling = " << format_double(cfg.moment_ceiling) << '\n';
  out << "export_paths = " << cfg.export_paths << '\n';
  write_section(out, "operator", cfg.op, "type");
  write_section(out, "drift", cfg.drift, "name");
  write_section(out, "diffusion", cfg.diffusion, "name");
  out << "\n[initial]\n";
  out << "value = " << format_double(cfg.initial_value) << '\n';
  out << "spread = " << format_double(cfg.initial_spread) << '\n';
}

std::string to_string(Scheme s) { return s == Scheme::resolvent_step ? "resolvent_step" : "project_then_step"; }

Scheme parse_scheme(const std::string& s) {
  if (s == "resolvent_step") return Scheme::resolvent_step;
  if (s == "project_then_step") return Scheme::project_then_step;
  throw ConfigError("unknown scheme '" + s + "'");
}

}  // namespace mvsde
