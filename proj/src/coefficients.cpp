#include "mvsde/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mvsde {

ModulusKappa ModulusKappa::linear(double slope) {
  if (!(slope > 0.0) || !std::isfinite(slope)) throw InvalidArgument("linear kappa needs slope > 0");
  return ModulusKappa{Kind::linear, slope};
}

ModulusKappa ModulusKappa::log_lipschitz(double eta) {
  if (!(eta > 0.0) || eta > std::exp(-1.0)) throw InvalidArgument("log-Lipschitz kappa needs eta in (0, 1/e]");
  return ModulusKappa{Kind::log_lipschitz, eta};
}

double eval_kappa(const ModulusKappa& kappa, double x) {
  if (!(x >= 0.0)) throw InvalidArgument("eval_kappa: x must be >= 0");
  if (kappa.kind == ModulusKappa::Kind::linear) return kappa.parameter * x;
  if (x == 0.0) return 0.0;
  const double eta = kappa.parameter;
  if (x <= eta) return -x * std::log(x);
  // Tangent at eta: slope ln(1/eta) - 1 >= 0.
  return -eta * std::log(eta) + (-std::log(eta) - 1.0) * (x - eta);
}

namespace {

// F(u) = int_{-r0}^{u} zeta~(r) dr for the piecewise-linear interpolant,
// continued by the constant zeta(0) for u > 0.
class SegmentPrimitive {
 public:
  explicit SegmentPrimitive(const SegmentView& zeta) : zeta_(zeta) {
    const Eigen::Index m = zeta.grid().delay_steps();
    const double dt = zeta.grid().dt();
    cumulative_ = Matrix::Zero(zeta.dimension(), m + 1);
    for (Eigen::Index j = 0; j < m; ++j) {
      cumulative_.col(j + 1) = cumulative_.col(j) + 0.5 * dt * (zeta.at(j) + zeta.at(j + 1));
    }
  }

  // u measured from -r0, i.e. r = -r0 + u.
  Vector at(double u) const {
    const Eigen::Index m = zeta_.grid().delay_steps();
    const double dt = zeta_.grid().dt();
    const double r0 = zeta_.grid().r0();
    if (u >= r0 || m == 0) return cumulative_.col(m) + (u - r0) * zeta_.at(m);
    Eigen::Index j = static_cast<Eigen::Index>(std::floor(u / dt));
    j = std::clamp<Eigen::Index>(j, 0, m - 1);
    const double tau = u - static_cast<double>(j) * dt;
    return cumulative_.col(j) + tau * zeta_.at(j) + (tau * tau / (2.0 * dt)) * (zeta_.at(j + 1) - zeta_.at(j));
  }

 private:
  const SegmentView& zeta_;
  Matrix cumulative_;
};

}  // namespace

Segment mollify_segment(const SegmentView& zeta, int n) {
  if (n < 1) throw InvalidArgument("mollify_segment: n must be >= 1");
  const TimeGrid& g = zeta.grid();
  const double norm = sup_norm(zeta);
  const double scale = norm > 0.0 ? std::min(norm, static_cast<double>(n)) / norm : 1.0;
  const double width = 1.0 / static_cast<double>(n);
  const double r0 = g.r0();
  const SegmentPrimitive primitive(zeta);
  Matrix out(zeta.dimension(), g.segment_points());
  for (Eigen::Index j = 0; j < g.segment_points(); ++j) {
    const double s = static_cast<double>(j) * g.dt();  // offset from -r0
    // Indicator of [-r0, 1]: the window [s, s + 1/n] never leaves it for
    // n >= 1, the clip is kept for fidelity to the formula.
    const double upper = std::min(s + width, 1.0 + r0);
    out.col(j) = static_cast<double>(n) * scale * (primitive.at(upper) - primitive.at(s));
  }
  return Segment(g, std::move(out));
}

double cutoff_weight(double norm, double radius, double ramp) {
  return std::clamp(1.0 - (norm - radius) / ramp, 0.0, 1.0);
}

PathDrift zero_drift(Eigen::Index d) {
  PathDrift f;
  f.eval = [d](double, const SegmentView&) -> Vector { return Vector::Zero(d); };
  f.bound = 0.0;
  f.lipschitz_sq = 0.0;
  return f;
}

PathDrift constant_drift(const Vector& value) {
  PathDrift f;
  f.eval = [value](double, const SegmentView&) -> Vector { return value; };
  f.bound = value.norm();
  f.lipschitz_sq = 0.0;
  return f;
}

PathDrift linear_delay_drift(double a, double b) {
  PathDrift f;
  f.eval = [a, b](double, const SegmentView& s) -> Vector { return -a * s.end() + b * s.delayed(); };
  f.lipschitz_sq = 2.0 * (a * a + b * b);
  return f;
}

PathDrift log_lipschitz_drift(const ModulusKappa& kappa) {
  PathDrift f;
  f.eval = [kappa](double, const SegmentView& s) -> Vector {
    const auto x = s.end();
    Vector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double mag = eval_kappa(kappa, std::min(std::abs(x(i)), 1.0));
      out(i) = x(i) > 0.0 ? -mag : (x(i) < 0.0 ? mag : 0.0);
    }
    return out;
  };
  return f;
}

PathDiffusion zero_diffusion(Eigen::Index d, Eigen::Index m) {
  PathDiffusion g;
  g.eval = [d, m](double, const SegmentView&) -> Matrix { return Matrix::Zero(d, m); };
  g.bound = 0.0;
  g.lipschitz_sq = 0.0;
  return g;
}

PathDiffusion constant_diffusion(double sigma, Eigen::Index d, Eigen::Index m) {
  const Matrix value = sigma * Matrix::Identity(d, m);
  PathDiffusion g;
  g.eval = [value](double, const SegmentView&) -> Matrix { return value; };
  g.bound = value.norm();
  g.lipschitz_sq = 0.0;
  return g;
}

MeanFieldDrift mean_field_linear_drift(double coupling, LawFunctional functional) {
  if (functional == LawFunctional::sup_sq) {
    throw InvalidArgument("mean-field linear drift needs eval_end or eval_delay");
  }
  MeanFieldDrift b;
  b.eval = [coupling, functional](double, const SegmentView& s, const LawView& law) -> Vector {
    return -(s.end() - coupling * law.moment(functional));
  };
  return b;
}

MeanFieldDrift mean_field_second_moment_drift() {
  MeanFieldDrift b;
  b.eval = [](double, const SegmentView& s, const LawView& law) -> Vector {
    return -s.end() / (1.0 + law.moments().sup_sq);
  };
  return b;
}

CoefficientParams::CoefficientParams(std::string section, std::map<std::string, std::string> values)
    : section_(std::move(section)), values_(std::move(values)) {}

double CoefficientParams::number(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != it->second.size()) {
    throw ConfigError("[" + section_ + "] " + key + ": expected a number, got '" + it->second + "'");
  }
  return v;
}

Vector CoefficientParams::vector(const std::string& key, const Vector& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  std::vector<double> parts;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    const std::string trimmed = b == std::string::npos ? "" : item.substr(b, e - b + 1);
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(trimmed, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != trimmed.size()) {
      throw ConfigError("[" + section_ + "] " + key + ": expected comma-separated numbers, got '" + it->second +
                        "'");
    }
    parts.push_back(v);
  }
  if (parts.empty()) throw ConfigError("[" + section_ + "] " + key + ": empty vector");
  return Eigen::Map<const Vector>(parts.data(), static_cast<Eigen::Index>(parts.size()));
}

std::string CoefficientParams::text(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  used_.insert(key);
  return it->second;
}

void CoefficientParams::require_all_used() const {
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) throw ConfigError("[" + section_ + "] unknown key '" + k + "'");
  }
}

namespace {

Vector fit_dimension(const Vector& v, Eigen::Index d, const std::string& what) {
  if (v.size() == 1 && d > 1) return Vector::Constant(d, v(0));
  if (v.size() != d) throw ConfigError(what + ": expected " + std::to_string(d) + " components");
  return v;
}

ModulusKappa kappa_from(const CoefficientParams& p) {
  const std::string kind = p.text("kappa", "log");
  if (kind == "log") return ModulusKappa::log_lipschitz(p.number("eta", 0.2));
  if (kind == "linear") return ModulusKappa::linear(p.number("slope", 1.0));
  throw ConfigError("[drift] kappa: expected 'log' or 'linear', got '" + kind + "'");
}

const std::set<std::string> kDrifts = {"zero", "constant", "linear_delay", "log_lipschitz"};
const std::set<std::string> kMeanFieldDrifts = {"mf_linear", "mf_second_moment"};
const std::set<std::string> kDiffusions = {"zero", "constant"};

}  // namespace

bool is_known_drift(const std::string& name) { return kDrifts.count(name) || kMeanFieldDrifts.count(name); }

bool is_known_diffusion(const std::string& name) { return kDiffusions.count(name) > 0; }

PathDrift make_drift(const std::string& name, const CoefficientParams& p, Eigen::Index d) {
  PathDrift f;
  if (name == "zero") {
    f = zero_drift(d);
  } else if (name == "constant") {
    f = constant_drift(fit_dimension(p.vector("value", Vector::Zero(1)), d, "[drift] value"));
  } else if (name == "linear_delay") {
    f = linear_delay_drift(p.number("a", 1.0), p.number("b", 0.5));
  } else if (name == "log_lipschitz") {
    f = log_lipschitz_drift(kappa_from(p));
  } else {
    throw ConfigError("[drift] unknown coefficient name '" + name + "'");
  }
  p.require_all_used();
  return f;
}

PathDiffusion make_diffusion(const std::string& name, const CoefficientParams& p, Eigen::Index d,
                             Eigen::Index m) {
  PathDiffusion g;
  if (name == "zero") {
    g = zero_diffusion(d, m);
  } else if (name == "constant") {
    g = constant_diffusion(p.number("sigma", 1.0), d, m);
  } else {
    throw ConfigError("[diffusion] unknown coefficient name '" + name + "'");
  }
  p.require_all_used();
  return g;
}

MeanFieldDrift make_mean_field_drift(const std::string& name, const CoefficientParams& p, Eigen::Index d) {
  if (kDrifts.count(name)) return lift(make_drift(name, p, d));
  MeanFieldDrift b;
  if (name == "mf_linear") {
    LawFunctional fn;
    try {
      fn = parse_law_functional(p.text("functional", "eval_delay"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("[drift] functional: ") + e.what());
    }
    if (fn == LawFunctional::sup_sq) throw ConfigError("[drift] functional: mf_linear needs eval_end or eval_delay");
    b = mean_field_linear_drift(p.number("coupling", 1.0), fn);
  } else if (name == "mf_second_moment") {
    b = mean_field_second_moment_drift();
  } else {
    throw ConfigError("[drift] unknown coefficient name '" + name + "'");
  }
  p.require_all_used();
  return b;
}

MeanFieldDiffusion make_mean_field_diffusion(const std::string& name, const CoefficientParams& p, Eigen::Index d,
                                             Eigen::Index m) {
  return lift(make_diffusion(name, p, d, m));
}

}  // namespace mvsde
