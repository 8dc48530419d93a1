#pragma once

// Particle ensembles, exact W2 between equal-size empirical segment laws,
// and the distribution iteration for the McKean-Vlasov fixed point.

#include "mvsde/coefficients.hpp"
#include "mvsde/law.hpp"
#include "mvsde/solver.hpp"

#include <memory>
#include <vector>

namespace mvsde {

inline constexpr std::size_t kExactAssignmentCap = 1024;

struct WassersteinResult {
  double distance = 0.0;
  // False when N exceeded the exact cap and a greedy coupling was used; the
  // distance is then an upper bound.
  bool exact = true;
};

// cost(i, j) = ||a_i - b_j||_inf^2 on the grid.
Matrix sup_cost_matrix(const LawView& a, const LawView& b);

// sqrt(min_pi (1/N) sum_i ||a_i - b_pi(i)||_inf^2). Throws InvalidArgument on
// mismatched N, grid or dimension.
WassersteinResult wasserstein2_detailed(const LawView& a, const LawView& b,
                                        std::size_t exact_cap = kExactAssignmentCap);
double wasserstein2(const EmpiricalSegmentLaw& a, const EmpiricalSegmentLaw& b);

// Empirical laws mu_t of N particles at every grid time t in [0, T], backed by
// the particle paths. Copies share storage.
class MeasureFlow {
 public:
  MeasureFlow(const TimeGrid& grid, std::vector<Matrix> paths);

  static MeasureFlow from_ensemble(const std::vector<TrajectoryPair>& ensemble);
  // mu^(0)_t = law of xi(0 ^ (t + .)).
  static MeasureFlow from_initial(const TimeGrid& grid, const std::vector<Segment>& xi_samples);

  const TimeGrid& grid() const { return grid_; }
  std::size_t particles() const { return paths_->size(); }
  const std::vector<Matrix>& paths() const { return *paths_; }
  const LawMoments& moments(Eigen::Index k) const { return (*moments_)[static_cast<std::size_t>(k)]; }
  LawView law_at(Eigen::Index k) const;

 private:
  TimeGrid grid_;
  std::shared_ptr<const std::vector<Matrix>> paths_;
  std::shared_ptr<const std::vector<LawMoments>> moments_;
};

// W2(a_t, b_t) for every grid time, computed in parallel over t.
std::vector<double> flow_distance(const MeasureFlow& a, const MeasureFlow& b, int threads = 1,
                                  bool* all_exact = nullptr);

// Particles solved independently against the frozen flow:
// particle i uses (t, zeta) -> b(t, zeta, flow at t).
std::vector<TrajectoryPair> solve_ensemble_frozen(const SolverConfig& cfg, const std::vector<Segment>& xi_samples,
                                                  const MeanFieldDrift& b, const MeanFieldDiffusion& sigma,
                                                  const MeasureFlow& flow, const std::vector<NoisePath>& noises,
                                                  int threads = 1);

struct DistributionIteration {
  // flows[0] is the initial-extension flow, flows[n] the law of iterate n.
  std::vector<MeasureFlow> flows;
  std::vector<TrajectoryPair> ensemble;
};

// Iteration n solves the ensemble against flows[n-1] with the same noises and
// reads flows[n] off the new ensemble.
DistributionIteration distribution_iterate(const SolverConfig& cfg, const std::vector<Segment>& xi_samples,
                                           const MeanFieldDrift& b, const MeanFieldDiffusion& sigma, int n_iters,
                                           const std::vector<NoisePath>& noises, int threads = 1);

struct SelfConsistentSolution {
  std::vector<TrajectoryPair> ensemble;
  MeasureFlow flow;
};

// Interacting particle system: at step k the law argument is the current
// empirical law of all particles' segments.
SelfConsistentSolution self_consistent_solve(const SolverConfig& cfg, const std::vector<Segment>& xi_samples,
                                             const MeanFieldDrift& b, const MeanFieldDiffusion& sigma,
                                             const std::vector<NoisePath>& noises, int threads = 1);

}  // namespace mvsde
