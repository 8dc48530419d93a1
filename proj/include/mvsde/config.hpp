#pragma once

// Experiment configuration: line-based `key = value` files with [section]
// headers. Top-level keys precede the first header; `#` starts a comment.

#include "mvsde/coefficients.hpp"
#include "mvsde/monotone.hpp"
#include "mvsde/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mvsde {

using KeyValues = std::map<std::string, std::string>;

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 20240611;

  // [grid]
  double dt = 1e-3;
  double r0 = 0.0;
  double horizon = 1.0;

  // [run]
  Eigen::Index dimension = 1;
  Eigen::Index brownian_dimension = 1;
  std::size_t paths = 1000;
  std::size_t particles = 256;
  int n_iters = 8;
  Scheme scheme = Scheme::resolvent_step;
  double membership_tol = 1e-9;
  double bdg_constant = 4.0;
  double moment_ceiling = 100.0;
  std::size_t export_paths = 0;

  // [operator] type plus shape parameters.
  KeyValues op = {{"type", "zero"}};
  // [drift] / [diffusion]: name plus parameters.
  KeyValues drift = {{"name", "zero"}};
  KeyValues diffusion = {{"name", "constant"}};

  // [initial]: constant segment at `value` plus spread * N(0,1) per particle
  // (drawn from the initial stream), projected onto the closure of D(A).
  double initial_value = 0.0;
  double initial_spread = 0.0;

  // Not part of the reproducible configuration.
  int threads = 1;
  std::string output_dir;
};

// Names accepted by run_experiment, in listing order.
const std::vector<std::string>& experiment_names();

// Defaults for a named experiment; throws ConfigError for unknown names.
ExperimentConfig default_config(const std::string& experiment);

// Parses a config file. The experiment's defaults are applied first, then
// every key in the file; unknown keys and sections are errors. Selecting a
// different drift/diffusion name or operator type drops the default
// parameters of that section.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

// Checks every invariant; each failure names its field.
void validate(const ExperimentConfig& cfg);

// Writes a file that parse_config reads back to an identical configuration.
void write_config(std::ostream& out, const ExperimentConfig& cfg);

TimeGrid make_grid(const ExperimentConfig& cfg);
MonotoneOperator make_operator(const KeyValues& section, Eigen::Index dimension);
SolverConfig make_solver_config(const ExperimentConfig& cfg);

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

}  // namespace mvsde
