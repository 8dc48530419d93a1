#pragma once

// Single-path time stepping for dX in -A(X)dt + f(t, X_t)dt + g(t, X_t)dW,
// with A treated implicitly and f, g explicitly, plus the Picard iteration
// in path space and its contraction diagnostics.

#include "mvsde/coefficients.hpp"
#include "mvsde/monotone.hpp"
#include "mvsde/random.hpp"
#include "mvsde/segments.hpp"

#include <functional>
#include <vector>

namespace mvsde {

enum class Scheme {
  // x_next = J_dt(p); works for every operator.
  resolvent_step,
  // x_next = P_D(p); normal cones and the zero operator only.
  project_then_step,
};

struct SolverConfig {
  TimeGrid grid;
  Scheme scheme = Scheme::resolvent_step;
  MonotoneOperator op = ZeroOperator{};
  double membership_tol = 1e-9;

  // Throws InvalidArgument for project_then_step with a graph operator.
  void validate() const;
};

// A coefficient failed while stepping; carries the step index.
class StepError : public std::runtime_error {
 public:
  StepError(Eigen::Index step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  Eigen::Index step() const { return step_; }

 private:
  Eigen::Index step_;
};

struct StepResult {
  Vector x_next;
  Vector dK;
};

// With p = x + drift dt + diffusion dW, returns (x_next, p - x_next) where
// x_next is the resolvent or projection of p. Throws DomainViolation when x
// is outside the closure of D(A) by more than the membership tolerance.
StepResult euler_step(const SolverConfig& cfg, const Eigen::Ref<const Vector>& x,
                      const Eigen::Ref<const Vector>& drift, const Eigen::Ref<const Matrix>& diffusion,
                      const Eigen::Ref<const Vector>& dW);

// dK in dt A(x_next) (resolvent) or dK in N_D(x_next) (projection), at
// cfg.membership_tol.
bool increment_admissible(const SolverConfig& cfg, const Eigen::Ref<const Vector>& x_next,
                          const Eigen::Ref<const Vector>& dK);

// Coefficients evaluated at step k on a segment (of the current or of a
// frozen path).
using StepCoefficients = std::function<std::pair<Vector, Matrix>(Eigen::Index k, const SegmentView& seg)>;

// Generic march: at step k the coefficients see the segment at t_k of
// `source(k, own_path)`; the own path has columns filled up to t_k.
using SegmentSource = std::function<SegmentView(Eigen::Index k, const Matrix& own_path)>;

TrajectoryPair march(const SolverConfig& cfg, const SegmentView& xi, const NoisePath& noise,
                     const SegmentSource& source, const StepCoefficients& coefficients);

// X_0 = xi; at each step f, g read the segment ending at the current state.
TrajectoryPair solve_path(const SolverConfig& cfg, const SegmentView& xi, const PathDrift& f, const PathDiffusion& g,
                          const NoisePath& noise);

// The zeroth iterate X^(0)(t) = xi(0 ^ t): xi on [-r0, 0], then constant.
TrajectoryPair initial_extension_path(const TimeGrid& grid, const SegmentView& xi);

// Iterates 1..n_iters; iterate n freezes the segments of iterate n-1 inside
// f and g and all iterates share `noise`. The zeroth iterate defaults to
// initial_extension_path; an explicit one may be any path on the grid, since
// only its segments are read.
std::vector<TrajectoryPair> picard_iterate(const SolverConfig& cfg, const SegmentView& xi, const PathDrift& f,
                                           const PathDiffusion& g, const NoisePath& noise, int n_iters,
                                           const TrajectoryPair* zeroth = nullptr);

// Successive sup-distance estimates over an ensemble of paths:
// D_n = mean_paths max_{[-r0, t0]} |X^(n+1) - X^(n)|^2 for n = 1..K-1 where
// iterates[p][n-1] is iterate n of path p.
struct ContractionReport {
  std::vector<double> distance;   // D_n, index n-1
  std::vector<double> std_error;  // Monte Carlo standard error of D_n
  std::vector<double> ratio;      // D_{n+1} / D_n, index n-1 (NaN when D_n = 0)
  Eigen::Index horizon_steps = 0;
};

ContractionReport contraction_report(const std::vector<std::vector<TrajectoryPair>>& iterates,
                                     Eigen::Index horizon_steps);

// Largest t0 with 2 (L2 + C L2) t0 exp(2 t0) <= 1/2, found by bisection.
double smallness_horizon(double lipschitz_sq, double bdg_constant);

}  // namespace mvsde
