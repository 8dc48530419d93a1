#include "mvsde/solver.hpp"

#include "mvsde/stats.hpp"

#include <cmath>
#include <limits>

namespace mvsde {

void SolverConfig::validate() const {
  if (scheme == Scheme::project_then_step && !is_normal_cone_or_zero(op)) {
    throw InvalidArgument("project_then_step requires a zero or normal-cone operator");
  }
  if (!(membership_tol > 0.0)) throw InvalidArgument("membership_tol must be > 0");
}

namespace {

Vector step_target(const SolverConfig& cfg, const Eigen::Ref<const Vector>& p) {
  if (cfg.scheme == Scheme::project_then_step) {
    if (const auto* nc = std::get_if<NormalCone>(&cfg.op)) return project(nc->domain, p);
    return p;
  }
  return resolvent(cfg.op, cfg.grid.dt(), p);
}

void require_in_domain(const SolverConfig& cfg, const Eigen::Ref<const Vector>& x, const char* what) {
  if (domain_distance(cfg.op, x) > cfg.membership_tol * (1.0 + x.norm())) {
    throw DomainViolation(std::string(what) + " lies outside the closure of D(A)");
  }
}

}  // namespace

StepResult euler_step(const SolverConfig& cfg, const Eigen::Ref<const Vector>& x,
                      const Eigen::Ref<const Vector>& drift, const Eigen::Ref<const Matrix>& diffusion,
                      const Eigen::Ref<const Vector>& dW) {
  if (drift.size() != x.size() || diffusion.rows() != x.size() || diffusion.cols() != dW.size()) {
    throw InvalidArgument("euler_step: coefficient shapes do not match state and noise");
  }
  require_in_domain(cfg, x, "euler_step: current state");
  const Vector p = x + drift * cfg.grid.dt() + diffusion * dW;
  if (!p.allFinite()) throw InvalidArgument("euler_step: non-finite predictor");
  StepResult r;
  r.x_next = step_target(cfg, p);
  r.dK = p - r.x_next;
  return r;
}

bool increment_admissible(const SolverConfig& cfg, const Eigen::Ref<const Vector>& x_next,
                          const Eigen::Ref<const Vector>& dK) {
  if (cfg.scheme == Scheme::project_then_step) {
    if (const auto* nc = std::get_if<NormalCone>(&cfg.op)) {
      return in_normal_cone(nc->domain, x_next, dK, cfg.membership_tol);
    }
    return dK.norm() <= cfg.membership_tol * (1.0 + x_next.norm());
  }
  return in_graph(cfg.op, OperatorPoint{x_next, dK / cfg.grid.dt()}, cfg.membership_tol);
}

TrajectoryPair march(const SolverConfig& cfg, const SegmentView& xi, const NoisePath& noise,
                     const SegmentSource& source, const StepCoefficients& coefficients) {
  const TimeGrid& grid = cfg.grid;
  if (!(xi.grid() == grid)) throw InvalidArgument("initial segment grid differs from solver grid");
  if (noise.steps() != grid.steps()) throw InvalidArgument("noise path length does not match grid");
  const Eigen::Index d = xi.dimension();
  const Eigen::Index m = grid.delay_steps();
  for (Eigen::Index j = 0; j <= m; ++j) require_in_domain(cfg, xi.at(j), "initial segment");

  Matrix path(d, grid.points());
  Matrix increments(d, grid.steps());
  path.leftCols(m + 1) = xi.values();
  for (Eigen::Index k = 0; k < grid.steps(); ++k) {
    std::pair<Vector, Matrix> coef;
    try {
      coef = coefficients(k, source(k, path));
    } catch (const StepError&) {
      throw;
    } catch (const std::exception& e) {
      throw StepError(k, e.what());
    }
    const StepResult r = euler_step(cfg, path.col(m + k), coef.first, coef.second, noise.increments.col(k));
    path.col(m + k + 1) = r.x_next;
    increments.col(k) = r.dK;
  }
  return TrajectoryPair(grid, std::move(path), std::move(increments));
}

namespace {

SegmentView own_segment(const TimeGrid& grid, Eigen::Index k, const Matrix& path) {
  return SegmentView(grid, ConstMatrixMap(path.data() + k * path.rows(), path.rows(), grid.segment_points(),
                                          Eigen::OuterStride<>(path.rows())));
}

StepCoefficients path_coefficients(const TimeGrid& grid, const PathDrift& f, const PathDiffusion& g) {
  return [&grid, &f, &g](Eigen::Index k, const SegmentView& seg) {
    const double t = grid.time(k);
    return std::pair<Vector, Matrix>(f(t, seg), g(t, seg));
  };
}

}  // namespace

TrajectoryPair solve_path(const SolverConfig& cfg, const SegmentView& xi, const PathDrift& f, const PathDiffusion& g,
                          const NoisePath& noise) {
  cfg.validate();
  const TimeGrid& grid = cfg.grid;
  return march(
      cfg, xi, noise, [&grid](Eigen::Index k, const Matrix& own) { return own_segment(grid, k, own); },
      path_coefficients(grid, f, g));
}

TrajectoryPair initial_extension_path(const TimeGrid& grid, const SegmentView& xi) {
  if (!(xi.grid() == grid)) throw InvalidArgument("initial segment grid differs from solver grid");
  const Eigen::Index m = grid.delay_steps();
  Matrix path(xi.dimension(), grid.points());
  path.leftCols(m + 1) = xi.values();
  for (Eigen::Index c = m + 1; c < grid.points(); ++c) path.col(c) = xi.end();
  return TrajectoryPair(grid, std::move(path), Matrix::Zero(xi.dimension(), grid.steps()));
}

std::vector<TrajectoryPair> picard_iterate(const SolverConfig& cfg, const SegmentView& xi, const PathDrift& f,
                                           const PathDiffusion& g, const NoisePath& noise, int n_iters,
                                           const TrajectoryPair* zeroth) {
  cfg.validate();
  if (n_iters < 1) throw InvalidArgument("picard_iterate: n_iters must be >= 1");
  const TimeGrid& grid = cfg.grid;
  TrajectoryPair previous = zeroth != nullptr ? *zeroth : initial_extension_path(grid, xi);
  if (!(previous.grid() == grid) || previous.dimension() != xi.dimension()) {
    throw InvalidArgument("picard_iterate: zeroth iterate does not match grid");
  }
  std::vector<TrajectoryPair> out;
  out.reserve(static_cast<std::size_t>(n_iters));
  const StepCoefficients coefficients = path_coefficients(grid, f, g);
  for (int n = 0; n < n_iters; ++n) {
    const TrajectoryPair* frozen = out.empty() ? &previous : &out.back();
    out.push_back(march(
        cfg, xi, noise, [frozen](Eigen::Index k, const Matrix&) { return frozen->segment(k); }, coefficients));
  }
  return out;
}

ContractionReport contraction_report(const std::vector<std::vector<TrajectoryPair>>& iterates,
                                     Eigen::Index horizon_steps) {
  if (iterates.size() < 2) throw InvalidArgument("contraction_report: need at least 2 paths");
  const std::size_t count = iterates.front().size();
  if (count < 3) throw InvalidArgument("contraction_report: need at least 3 iterates");
  for (const auto& p : iterates) {
    if (p.size() != count) throw InvalidArgument("contraction_report: ragged iterate lists");
  }
  const TimeGrid& grid = iterates.front().front().grid();
  if (horizon_steps < 0 || horizon_steps > grid.steps()) {
    throw InvalidArgument("contraction_report: horizon outside [0, T]");
  }
  const Eigen::Index cols = grid.delay_steps() + horizon_steps + 1;
  ContractionReport report;
  report.horizon_steps = horizon_steps;
  std::vector<double> per_path(iterates.size());
  for (std::size_t n = 0; n + 1 < count; ++n) {
    for (std::size_t p = 0; p < iterates.size(); ++p) {
      const Matrix& a = iterates[p][n + 1].path();
      const Matrix& b = iterates[p][n].path();
      per_path[p] = (a.leftCols(cols) - b.leftCols(cols)).colwise().squaredNorm().maxCoeff();
    }
    const MeanEstimate e = estimate_mean(per_path);
    report.distance.push_back(e.mean);
    report.std_error.push_back(e.std_error);
  }
  for (std::size_t n = 0; n + 1 < report.distance.size(); ++n) {
    const double den = report.distance[n];
    report.ratio.push_back(den > 0.0 ? report.distance[n + 1] / den : std::numeric_limits<double>::quiet_NaN());
  }
  return report;
}

double smallness_horizon(double lipschitz_sq, double bdg_constant) {
  if (!(lipschitz_sq >= 0.0) || !(bdg_constant >= 0.0)) {
    throw InvalidArgument("smallness_horizon: constants must be >= 0");
  }
  const double c = 2.0 * (lipschitz_sq + bdg_constant * lipschitz_sq);
  if (c == 0.0) return std::numeric_limits<double>::infinity();
  const auto excess = [c](double t) { return c * t * std::exp(2.0 * t) - 0.5; };
  double lo = 0.0;
  double hi = 1.0;
  while (excess(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) <= 0.0 ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace mvsde
