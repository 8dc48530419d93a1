#pragma once

// Delay segments on a uniform grid, the sup-norm, and the discretized pair
// (X, K) with K stored as per-step increments.

#include "mvsde/types.hpp"

#include <iosfwd>

namespace mvsde {

// Uniform grid on [-r0, T] with r0 = delay_steps*dt and T = steps*dt. Column i
// of a path matrix holds time (i - delay_steps)*dt.
class TimeGrid {
 public:
  // Throws InvalidArgument unless r0 and horizon are integer multiples of dt
  // (relative tolerance 1e-9), dt > 0, r0 >= 0 and horizon >= dt.
  TimeGrid(double dt, double r0, double horizon);

  static TimeGrid from_steps(double dt, Eigen::Index delay_steps, Eigen::Index steps);

  double dt() const { return dt_; }
  Eigen::Index delay_steps() const { return delay_steps_; }
  Eigen::Index steps() const { return steps_; }
  double r0() const { return static_cast<double>(delay_steps_) * dt_; }
  double horizon() const { return static_cast<double>(steps_) * dt_; }
  // Number of grid points in [-r0, T].
  Eigen::Index points() const { return delay_steps_ + steps_ + 1; }
  // Number of grid points in a segment window.
  Eigen::Index segment_points() const { return delay_steps_ + 1; }
  // Time of step k >= 0.
  double time(Eigen::Index k) const { return static_cast<double>(k) * dt_; }
  // Step index of a grid time in [0, T]; throws InvalidArgument otherwise.
  Eigen::Index step_index(double t) const;

  bool operator==(const TimeGrid& o) const {
    return dt_ == o.dt_ && delay_steps_ == o.delay_steps_ && steps_ == o.steps_;
  }

 private:
  TimeGrid() = default;
  double dt_ = 0.0;
  Eigen::Index delay_steps_ = 0;
  Eigen::Index steps_ = 0;
};

using ConstMatrixMap = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;

// Non-owning window theta_j = -r0 + j*dt, j = 0..m, onto d x (m+1) values.
class SegmentView {
 public:
  SegmentView(const TimeGrid& grid, const ConstMatrixMap& values);

  const TimeGrid& grid() const { return grid_; }
  const ConstMatrixMap& values() const { return values_; }
  Eigen::Index dimension() const { return values_.rows(); }
  // Value at theta_j.
  auto at(Eigen::Index j) const { return values_.col(j); }
  // zeta(0)
  auto end() const { return values_.col(values_.cols() - 1); }
  // zeta(-r0)
  auto delayed() const { return values_.col(0); }

 private:
  TimeGrid grid_;
  ConstMatrixMap values_;
};

// Owning segment.
class Segment {
 public:
  // values must be d x (m+1) and finite.
  Segment(const TimeGrid& grid, Matrix values);
  // Constant segment equal to c.
  static Segment constant(const TimeGrid& grid, const Vector& c);

  const TimeGrid& grid() const { return grid_; }
  const Matrix& values() const { return values_; }
  Eigen::Index dimension() const { return values_.rows(); }
  SegmentView view() const;
  operator SegmentView() const { return view(); }  // NOLINT(google-explicit-constructor)

 private:
  TimeGrid grid_;
  Matrix values_;
};

// max_j |zeta(theta_j)|
double sup_norm(const SegmentView& seg);
// sup_norm(a - b); grids and dimensions must match.
double sup_distance(const SegmentView& a, const SegmentView& b);

// theta -> xi(0 ^ (t + theta)) for grid time t >= 0.
Segment initial_extension(const SegmentView& xi, double t);

// Discretized (X, K). X has one column per grid point of [-r0, T]; the K
// increments dK_k belong to the step t_k -> t_{k+1}. K(0) = 0 and K is their
// running sum.
class TrajectoryPair {
 public:
  TrajectoryPair(const TimeGrid& grid, Matrix path, Matrix increments);

  const TimeGrid& grid() const { return grid_; }
  Eigen::Index dimension() const { return path_.rows(); }
  const Matrix& path() const { return path_; }
  const Matrix& increments() const { return increments_; }
  // d x (n+1), column k is K(t_k).
  const Matrix& reflection() const { return reflection_; }
  // X(t_k), k = 0..n.
  auto state(Eigen::Index k) const { return path_.col(grid_.delay_steps() + k); }
  // X_{t_k} as a view into the path.
  SegmentView segment(Eigen::Index k) const;
  // |K| over steps k0 < j <= k1 (index form).
  double variation(Eigen::Index k0, Eigen::Index k1) const;

 private:
  TimeGrid grid_;
  Matrix path_;
  Matrix increments_;
  Matrix reflection_;
  Vector variation_prefix_;
};

// X_t for grid time t in [0, T].
SegmentView segment_at(const TrajectoryPair& traj, double t);

// Discrete total variation of K on (s, t].
double total_variation(const TrajectoryPair& traj, double s, double t);

// max over all grid points in [-r0, T] of |X1 - X2|.
double path_sup_distance(const TrajectoryPair& a, const TrajectoryPair& b);

// sum_k <X1(t_{k+1}) - X2(t_{k+1}), dK1_k - dK2_k>; nonnegative (up to
// round-off) for pairs driven by the same monotone operator.
double increment_coupling(const TrajectoryPair& a, const TrajectoryPair& b);

// CSV with header t,x0..,k0..,kvar. Rows cover [-r0, T]; K cells are empty
// before t = 0.
void write_trajectory_csv(std::ostream& out, const TrajectoryPair& traj);

}  // namespace mvsde
