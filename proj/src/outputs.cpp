#include "mvsde/outputs.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace mvsde {

std::string to_string(Comparison c) {
  switch (c) {
    case Comparison::within:
      return "within";
    case Comparison::at_most:
      return "at_most";
    case Comparison::at_least:
      return "at_least";
    case Comparison::report:
      return "report";
  }
  return "report";
}

Comparison parse_comparison(const std::string& s) {
  if (s == "within") return Comparison::within;
  if (s == "at_most") return Comparison::at_most;
  if (s == "at_least") return Comparison::at_least;
  if (s == "report") return Comparison::report;
  throw InvalidArgument("unknown comparison '" + s + "'");
}

ResultRecord within(std::string experiment, std::string metric, double value, std::optional<double> std_error,
                    double target, double tolerance) {
  ResultRecord r{std::move(experiment), std::move(metric), value, std_error, target, tolerance, Comparison::within};
  r.pass = std::abs(value - target) <= tolerance;
  return r;
}

ResultRecord at_most(std::string experiment, std::string metric, double value, double bound) {
  ResultRecord r{std::move(experiment), std::move(metric), value, std::nullopt, bound, std::nullopt,
                 Comparison::at_most};
  r.pass = value <= bound;
  return r;
}

ResultRecord at_least(std::string experiment, std::string metric, double value, double bound) {
  ResultRecord r{std::move(experiment), std::move(metric), value, std::nullopt, bound, std::nullopt,
                 Comparison::at_least};
  r.pass = value >= bound;
  return r;
}

ResultRecord report(std::string experiment, std::string metric, double value, std::optional<double> std_error) {
  return ResultRecord{std::move(experiment), std::move(metric), value, std_error, std::nullopt, std::nullopt,
                      Comparison::report};
}

bool all_pass(const std::vector<ResultRecord>& records) {
  for (const auto& r : records) {
    if (!r.pass) return false;
  }
  return true;
}

namespace {

nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double read_number(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return read_number(j.at(key));
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  return f;
}

void close_out(std::ofstream& f, const std::filesystem::path& p) {
  f.close();
  if (!f) throw std::runtime_error("error writing '" + p.string() + "'");
}

}  // namespace

nlohmann::json to_json(const ResultRecord& r) {
  nlohmann::json j;
  j["experiment"] = r.experiment;
  j["metric"] = r.metric;
  j["value"] = number(r.value);
  if (r.std_error) j["std_error"] = number(*r.std_error);
  if (r.target) j["target"] = number(*r.target);
  if (r.tolerance) j["tolerance"] = number(*r.tolerance);
  j["comparison"] = to_string(r.comparison);
  j["pass"] = r.pass;
  return j;
}

ResultRecord record_from_json(const nlohmann::json& j) {
  ResultRecord r;
  r.experiment = j.at("experiment").get<std::string>();
  r.metric = j.at("metric").get<std::string>();
  r.value = read_number(j.at("value"));
  r.std_error = read_optional(j, "std_error");
  r.target = read_optional(j, "target");
  r.tolerance = read_optional(j, "tolerance");
  r.comparison = parse_comparison(j.at("comparison").get<std::string>());
  r.pass = j.at("pass").get<bool>();
  return r;
}

void emit_outputs(const ExperimentOutput& out, const ExperimentConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw std::runtime_error("cannot create '" + root.string() + "': " + ec.message());

  {
    const fs::path p = root / "results.jsonl";
    auto f = open_out(p);
    for (const auto& r : out.records) f << to_json(r).dump() << '\n';
    close_out(f, p);
  }
  {
    const fs::path p = root / "timings.jsonl";
    auto f = open_out(p);
    for (const auto& r : out.records) {
      nlohmann::json j{{"experiment", r.experiment}, {"metric", r.metric}, {"wall_seconds", r.wall_seconds}};
      f << j.dump() << '\n';
    }
    close_out(f, p);
  }
  {
    const fs::path p = root / "manifest.cfg";
    auto f = open_out(p);
    write_config(f, cfg);
    f << "\n# pass/fail rules used by this run\n";
    for (const auto& r : out.records) {
      if (r.comparison == Comparison::report) continue;
      f << "# " << r.metric << ": " << to_string(r.comparison);
      if (r.target) f << " target " << nlohmann::json(number(*r.target)).dump();
      if (r.tolerance) f << " tolerance " << nlohmann::json(number(*r.tolerance)).dump();
      f << '\n';
    }
    close_out(f, p);
  }
  if (!out.flow_records.empty()) {
    const fs::path p = root / "flows.jsonl";
    auto f = open_out(p);
    for (const auto& j : out.flow_records) f << j.dump() << '\n';
    close_out(f, p);
  }
  for (const auto& [stem, traj] : out.trajectories) {
    const fs::path p = root / (stem + ".csv");
    auto f = open_out(p);
    write_trajectory_csv(f, traj);
    close_out(f, p);
  }
}

std::vector<ResultRecord> read_results(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path p = fs::path(dir) / "results.jsonl";
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
  std::vector<ResultRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  std::ifstream timings(fs::path(dir) / "timings.jsonl");
  std::size_t i = 0;
  while (timings && std::getline(timings, line) && i < records.size()) {
    if (line.empty()) continue;
    records[i++].wall_seconds = nlohmann::json::parse(line).at("wall_seconds").get<double>();
  }
  return records;
}

}  // namespace mvsde
