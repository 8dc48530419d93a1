#pragma once

// Named experiments. Each returns its records (plus optional trajectories and
// flow rows); all randomness is keyed by cfg.seed, so a config determines its
// results.jsonl regardless of cfg.threads.

#include "mvsde/config.hpp"
#include "mvsde/meanfield.hpp"
#include "mvsde/outputs.hpp"

#include <vector>

namespace mvsde {

// Dispatch on cfg.experiment; validates first.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

ExperimentOutput oracle_reflected_bm(const ExperimentConfig& cfg);
ExperimentOutput run_k_variation_stability(const ExperimentConfig& cfg);
ExperimentOutput run_zero_operator_reduction(const ExperimentConfig& cfg);
ExperimentOutput run_monotone_primitives(const ExperimentConfig& cfg);
ExperimentOutput run_picard_contraction(const ExperimentConfig& cfg);
ExperimentOutput run_uniqueness_test(const ExperimentConfig& cfg);
ExperimentOutput run_w2_oracle(const ExperimentConfig& cfg);
ExperimentOutput run_distribution_iteration(const ExperimentConfig& cfg);
ExperimentOutput oracle_delay_mean(const ExperimentConfig& cfg);
ExperimentOutput run_continuity_test(const ExperimentConfig& cfg);

// Initial segment of path/particle p: constant at cfg.initial_value plus
// cfg.initial_spread times a standard normal vector, projected onto the
// closure of D(A).
Segment initial_sample(const ExperimentConfig& cfg, const MonotoneOperator& op, const TimeGrid& grid,
                       std::uint64_t p);

// Nearest point of the closure of D(A).
Vector project_to_domain(const MonotoneOperator& op, const Eigen::Ref<const Vector>& x);

// m'(t) = -(m(t) - c m(t - r0)), m = 1 on [-r0, 0], solved interval by
// interval with classical RK4 at step h (history interpolated linearly
// between RK4 nodes), sampled at the grid times 0, dt, ..., T.
std::vector<double> delay_mean_reference(double coupling, const TimeGrid& grid, int substeps);

}  // namespace mvsde
