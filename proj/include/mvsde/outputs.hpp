#pragma once

// Result records and the files a run leaves behind: results.jsonl,
// timings.jsonl, manifest.cfg, flows.jsonl and trajectory CSVs.

#include "mvsde/config.hpp"
#include "mvsde/segments.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mvsde {

enum class Comparison {
  within,    // |value - target| <= tolerance
  at_most,   // value <= target
  at_least,  // value >= target
  report,    // informational; always passes
};

std::string to_string(Comparison c);
Comparison parse_comparison(const std::string& s);

struct ResultRecord {
  std::string experiment;
  std::string metric;
  double value = 0.0;
  std::optional<double> std_error;
  std::optional<double> target;
  std::optional<double> tolerance;
  Comparison comparison = Comparison::report;
  bool pass = true;
  // Kept out of results.jsonl so that file is reproducible; see timings.jsonl.
  double wall_seconds = 0.0;

  bool operator==(const ResultRecord&) const = default;
};

// Builders that set pass from the comparison. NaN values never pass.
ResultRecord within(std::string experiment, std::string metric, double value, std::optional<double> std_error,
                    double target, double tolerance);
ResultRecord at_most(std::string experiment, std::string metric, double value, double bound);
ResultRecord at_least(std::string experiment, std::string metric, double value, double bound);
ResultRecord report(std::string experiment, std::string metric, double value,
                    std::optional<double> std_error = std::nullopt);

struct ExperimentOutput {
  std::vector<ResultRecord> records;
  std::vector<std::pair<std::string, TrajectoryPair>> trajectories;  // file stem, path
  std::vector<nlohmann::json> flow_records;
};

bool all_pass(const std::vector<ResultRecord>& records);

nlohmann::json to_json(const ResultRecord& r);
ResultRecord record_from_json(const nlohmann::json& j);

// Writes results.jsonl, timings.jsonl and manifest.cfg, plus flows.jsonl and
// <stem>.csv when present. Creates dir. IO failures raise std::runtime_error
// naming the path.
void emit_outputs(const ExperimentOutput& out, const ExperimentConfig& cfg, const std::string& dir);

// Reads results.jsonl and joins wall_seconds from timings.jsonl when present.
std::vector<ResultRecord> read_results(const std::string& dir);

}  // namespace mvsde
