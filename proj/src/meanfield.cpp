#include "mvsde/meanfield.hpp"

#include "mvsde/assignment.hpp"
#include "mvsde/parallel.hpp"
#include "mvsde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace mvsde {

Matrix sup_cost_matrix(const LawView& a, const LawView& b) {
  const std::size_t n = a.size();
  if (b.size() != n) throw InvalidArgument("wasserstein2: laws have different particle counts");
  if (n == 0) throw InvalidArgument("wasserstein2: empty law");
  const SegmentView a0 = a.segment(0);
  const SegmentView b0 = b.segment(0);
  if (!(a0.grid() == b0.grid()) || a0.dimension() != b0.dimension()) {
    throw InvalidArgument("wasserstein2: laws live on different grids");
  }
  Matrix cost(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const SegmentView si = a.segment(i);
    for (std::size_t j = 0; j < n; ++j) {
      cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (si.values() - b.segment(j).values()).colwise().squaredNorm().maxCoeff();
    }
  }
  return cost;
}

WassersteinResult wasserstein2_detailed(const LawView& a, const LawView& b, std::size_t exact_cap) {
  const Matrix cost = sup_cost_matrix(a, b);
  WassersteinResult r;
  r.exact = a.size() <= exact_cap;
  const Assignment plan = r.exact ? solve_assignment(cost) : greedy_assignment(cost);
  // Sorted matched costs make the sum independent of which law is the row
  // side, so W2(a, b) == W2(b, a) bit for bit.
  std::vector<double> matched(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    matched[i] = cost(static_cast<Eigen::Index>(i), plan.column_of[i]);
  }
  std::sort(matched.begin(), matched.end());
  r.distance = std::sqrt(std::max(0.0, pairwise_sum(matched) / static_cast<double>(a.size())));
  return r;
}

double wasserstein2(const EmpiricalSegmentLaw& a, const EmpiricalSegmentLaw& b) {
  const LawMoments ma = law_moments(a);
  const LawMoments mb = law_moments(b);
  return wasserstein2_detailed(LawView(a, ma), LawView(b, mb)).distance;
}

MeasureFlow::MeasureFlow(const TimeGrid& grid, std::vector<Matrix> paths) : grid_(grid) {
  if (paths.empty()) throw InvalidArgument("measure flow needs at least one particle");
  for (const Matrix& p : paths) {
    if (p.cols() != grid.points() || p.rows() != paths.front().rows()) {
      throw InvalidArgument("measure flow paths must share grid and dimension");
    }
  }
  auto moments = std::make_shared<std::vector<LawMoments>>();
  moments->reserve(static_cast<std::size_t>(grid.steps() + 1));
  for (Eigen::Index k = 0; k <= grid.steps(); ++k) moments->push_back(path_moments(grid, paths, k));
  paths_ = std::make_shared<const std::vector<Matrix>>(std::move(paths));
  moments_ = std::move(moments);
}

MeasureFlow MeasureFlow::from_ensemble(const std::vector<TrajectoryPair>& ensemble) {
  if (ensemble.empty()) throw InvalidArgument("measure flow from an empty ensemble");
  std::vector<Matrix> paths;
  paths.reserve(ensemble.size());
  for (const auto& t : ensemble) paths.push_back(t.path());
  return MeasureFlow(ensemble.front().grid(), std::move(paths));
}

MeasureFlow MeasureFlow::from_initial(const TimeGrid& grid, const std::vector<Segment>& xi_samples) {
  std::vector<Matrix> paths;
  paths.reserve(xi_samples.size());
  for (const Segment& xi : xi_samples) paths.push_back(initial_extension_path(grid, xi.view()).path());
  return MeasureFlow(grid, std::move(paths));
}

LawView MeasureFlow::law_at(Eigen::Index k) const {
  if (k < 0 || k > grid_.steps()) throw InvalidArgument("measure flow: step outside [0, n]");
  return LawView(grid_, *paths_, k, moments(k));
}

std::vector<double> flow_distance(const MeasureFlow& a, const MeasureFlow& b, int threads, bool* all_exact) {
  if (!(a.grid() == b.grid())) throw InvalidArgument("flow_distance: flows live on different grids");
  const std::size_t count = static_cast<std::size_t>(a.grid().steps() + 1);
  std::vector<double> out(count);
  std::vector<char> exact(count, 1);
  parallel_for(count, threads, [&](std::size_t k) {
    const auto r = wasserstein2_detailed(a.law_at(static_cast<Eigen::Index>(k)), b.law_at(static_cast<Eigen::Index>(k)));
    out[k] = r.distance;
    exact[k] = r.exact ? 1 : 0;
  });
  if (all_exact != nullptr) {
    *all_exact = std::all_of(exact.begin(), exact.end(), [](char c) { return c != 0; });
  }
  return out;
}

namespace {

void check_ensemble_inputs(const SolverConfig& cfg, const std::vector<Segment>& xi_samples,
                           const std::vector<NoisePath>& noises) {
  cfg.validate();
  if (xi_samples.empty()) throw InvalidArgument("ensemble needs at least one particle");
  if (noises.size() != xi_samples.size()) throw InvalidArgument("need one noise path per particle");
}

}  // namespace

std::vector<TrajectoryPair> solve_ensemble_frozen(const SolverConfig& cfg, const std::vector<Segment>& xi_samples,
                                                  const MeanFieldDrift& b, const MeanFieldDiffusion& sigma,
                                                  const MeasureFlow& flow, const std::vector<NoisePath>& noises,
                                                  int threads) {
  check_ensemble_inputs(cfg, xi_samples, noises);
  if (!(flow.grid() == cfg.grid)) throw InvalidArgument("frozen flow grid differs from solver grid");
  const TimeGrid& grid = cfg.grid;
  std::vector<std::optional<TrajectoryPair>> slots(xi_samples.size());
  parallel_for(xi_samples.size(), threads, [&](std::size_t i) {
    const StepCoefficients coefficients = [&](Eigen::Index k, const SegmentView& seg) {
      const LawView law = flow.law_at(k);
      const double t = grid.time(k);
      return std::pair<Vector, Matrix>(b(t, seg, law), sigma(t, seg, law));
    };
    const SegmentSource own = [&grid](Eigen::Index k, const Matrix& path) {
      return SegmentView(grid, ConstMatrixMap(path.data() + k * path.rows(), path.rows(), grid.segment_points(),
                                              Eigen::OuterStride<>(path.rows())));
    };
    try {
      slots[i].emplace(march(cfg, xi_samples[i].view(), noises[i], own, coefficients));
    } catch (const std::exception& e) {
      throw std::runtime_error("particle " + std::to_string(i) + ": " + e.what());
    }
  });
  std::vector<TrajectoryPair> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

DistributionIteration distribution_iterate(const SolverConfig& cfg, const std::vector<Segment>& xi_samples,
                                           const MeanFieldDrift& b, const MeanFieldDiffusion& sigma, int n_iters,
                                           const std::vector<NoisePath>& noises, int threads) {
  check_ensemble_inputs(cfg, xi_samples, noises);
  if (n_iters < 1) throw InvalidArgument("distribution_iterate: n_iters must be >= 1");
  DistributionIteration out;
  out.flows.push_back(MeasureFlow::from_initial(cfg.grid, xi_samples));
  for (int n = 1; n <= n_iters; ++n) {
    out.ensemble = solve_ensemble_frozen(cfg, xi_samples, b, sigma, out.flows.back(), noises, threads);
    out.flows.push_back(MeasureFlow::from_ensemble(out.ensemble));
  }
  return out;
}

SelfConsistentSolution self_consistent_solve(const SolverConfig& cfg, const std::vector<Segment>& xi_samples,
                                             const MeanFieldDrift& b, const MeanFieldDiffusion& sigma,
                                             const std::vector<NoisePath>& noises, int threads) {
  check_ensemble_inputs(cfg, xi_samples, noises);
  const TimeGrid& grid = cfg.grid;
  const Eigen::Index m = grid.delay_steps();
  const std::size_t count = xi_samples.size();
  std::vector<Matrix> paths(count);
  std::vector<Matrix> increments(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!(xi_samples[i].grid() == grid)) throw InvalidArgument("initial segment grid differs from solver grid");
    paths[i].resize(xi_samples[i].dimension(), grid.points());
    paths[i].leftCols(m + 1) = xi_samples[i].values();
    increments[i].resize(xi_samples[i].dimension(), grid.steps());
  }
  for (Eigen::Index k = 0; k < grid.steps(); ++k) {
    // Snapshot of the law at t_k; read-only while the step runs.
    const LawMoments moments = path_moments(grid, paths, k);
    const LawView law(grid, paths, k, moments);
    const double t = grid.time(k);
    parallel_for(count, threads, [&](std::size_t i) {
      Matrix& path = paths[i];
      const SegmentView seg(grid, ConstMatrixMap(path.data() + k * path.rows(), path.rows(), grid.segment_points(),
                                                 Eigen::OuterStride<>(path.rows())));
      Vector drift;
      Matrix diffusion;
      try {
        drift = b(t, seg, law);
        diffusion = sigma(t, seg, law);
      } catch (const std::exception& e) {
        throw StepError(k, "particle " + std::to_string(i) + ": " + e.what());
      }
      const StepResult r = euler_step(cfg, path.col(m + k), drift, diffusion, noises[i].increments.col(k));
      path.col(m + k + 1) = r.x_next;
      increments[i].col(k) = r.dK;
    });
  }
  std::vector<TrajectoryPair> ensemble;
  ensemble.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ensemble.emplace_back(grid, paths[i], std::move(increments[i]));
  MeasureFlow flow(grid, std::move(paths));
  return SelfConsistentSolution{std::move(ensemble), std::move(flow)};
}

}  // namespace mvsde
