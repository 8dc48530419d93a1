#include "mvsde/segments.hpp"

#include "mvsde/format.hpp"

#include <cmath>
#include <ostream>

namespace mvsde {

namespace {

constexpr double kGridTol = 1e-9;

Eigen::Index whole_steps(double value, double dt, const char* what) {
  const double q = value / dt;
  const double r = std::round(q);
  if (std::abs(q - r) > kGridTol * std::max(1.0, std::abs(q))) {
    throw InvalidArgument(std::string(what) + " is not an integer multiple of dt");
  }
  return static_cast<Eigen::Index>(r);
}

ConstMatrixMap map_columns(const Matrix& m, Eigen::Index first, Eigen::Index count) {
  return ConstMatrixMap(m.data() + first * m.rows(), m.rows(), count, Eigen::OuterStride<>(m.rows()));
}

}  // namespace

TimeGrid::TimeGrid(double dt, double r0, double horizon) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive and finite");
  if (!(r0 >= 0.0) || !std::isfinite(r0)) throw InvalidArgument("r0 must be >= 0 and finite");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("T must be positive and finite");
  dt_ = dt;
  delay_steps_ = whole_steps(r0, dt, "r0");
  steps_ = whole_steps(horizon, dt, "T");
  if (steps_ < 1) throw InvalidArgument("T must be at least one step");
}

TimeGrid TimeGrid::from_steps(double dt, Eigen::Index delay_steps, Eigen::Index steps) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive and finite");
  if (delay_steps < 0 || steps < 1) throw InvalidArgument("need delay_steps >= 0 and steps >= 1");
  TimeGrid g;
  g.dt_ = dt;
  g.delay_steps_ = delay_steps;
  g.steps_ = steps;
  return g;
}

Eigen::Index TimeGrid::step_index(double t) const {
  if (!std::isfinite(t) || t < -kGridTol * dt_) throw InvalidArgument("time must be >= 0");
  const Eigen::Index k = whole_steps(t, dt_, "time");
  if (k < 0 || k > steps_) throw InvalidArgument("time outside [0, T]");
  return k;
}

SegmentView::SegmentView(const TimeGrid& grid, const ConstMatrixMap& values) : grid_(grid), values_(values) {
  if (values_.cols() != grid_.segment_points()) {
    throw InvalidArgument("segment has " + std::to_string(values_.cols()) + " points, grid expects " +
                          std::to_string(grid_.segment_points()));
  }
}

Segment::Segment(const TimeGrid& grid, Matrix values) : grid_(grid), values_(std::move(values)) {
  if (values_.cols() != grid_.segment_points() || values_.rows() < 1) {
    throw InvalidArgument("segment values must be d x (m+1)");
  }
  if (!values_.allFinite()) throw InvalidArgument("segment values must be finite");
}

Segment Segment::constant(const TimeGrid& grid, const Vector& c) {
  return Segment(grid, c.replicate(1, grid.segment_points()));
}

SegmentView Segment::view() const { return SegmentView(grid_, map_columns(values_, 0, values_.cols())); }

double sup_norm(const SegmentView& seg) { return seg.values().colwise().norm().maxCoeff(); }

double sup_distance(const SegmentView& a, const SegmentView& b) {
  if (!(a.grid() == b.grid()) || a.dimension() != b.dimension()) {
    throw InvalidArgument("sup_distance: segments live on different grids");
  }
  return (a.values() - b.values()).colwise().norm().maxCoeff();
}

Segment initial_extension(const SegmentView& xi, double t) {
  const TimeGrid& g = xi.grid();
  if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("initial_extension: t must be >= 0");
  const Eigen::Index k = whole_steps(t, g.dt(), "time");
  const Eigen::Index m = g.delay_steps();
  Matrix out(xi.dimension(), m + 1);
  for (Eigen::Index j = 0; j <= m; ++j) out.col(j) = xi.at(std::min(j + k, m));
  return Segment(g, std::move(out));
}

TrajectoryPair::TrajectoryPair(const TimeGrid& grid, Matrix path, Matrix increments)
    : grid_(grid), path_(std::move(path)), increments_(std::move(increments)) {
  const Eigen::Index n = grid_.steps();
  if (path_.cols() != grid_.points() || increments_.cols() != n || increments_.rows() != path_.rows()) {
    throw InvalidArgument("trajectory pair: path or increment shape does not match grid");
  }
  reflection_.resize(path_.rows(), n + 1);
  variation_prefix_.resize(n + 1);
  reflection_.col(0).setZero();
  variation_prefix_(0) = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    reflection_.col(k + 1) = reflection_.col(k) + increments_.col(k);
    variation_prefix_(k + 1) = variation_prefix_(k) + increments_.col(k).norm();
  }
}

SegmentView TrajectoryPair::segment(Eigen::Index k) const {
  if (k < 0 || k > grid_.steps()) throw InvalidArgument("segment index outside [0, n]");
  return SegmentView(grid_, map_columns(path_, k, grid_.segment_points()));
}

double TrajectoryPair::variation(Eigen::Index k0, Eigen::Index k1) const {
  if (k0 > k1) throw InvalidArgument("total_variation: s > t");
  if (k0 < 0 || k1 > grid_.steps()) throw InvalidArgument("total_variation: index outside [0, n]");
  return variation_prefix_(k1) - variation_prefix_(k0);
}

SegmentView segment_at(const TrajectoryPair& traj, double t) {
  return traj.segment(traj.grid().step_index(t));
}

double total_variation(const TrajectoryPair& traj, double s, double t) {
  if (s > t) throw InvalidArgument("total_variation: s > t");
  return traj.variation(traj.grid().step_index(s), traj.grid().step_index(t));
}

double path_sup_distance(const TrajectoryPair& a, const TrajectoryPair& b) {
  if (!(a.grid() == b.grid()) || a.dimension() != b.dimension()) {
    throw InvalidArgument("path_sup_distance: trajectories live on different grids");
  }
  return (a.path() - b.path()).colwise().norm().maxCoeff();
}

double increment_coupling(const TrajectoryPair& a, const TrajectoryPair& b) {
  if (!(a.grid() == b.grid()) || a.dimension() != b.dimension()) {
    throw InvalidArgument("increment_coupling: trajectories live on different grids");
  }
  double sum = 0.0;
  for (Eigen::Index k = 0; k < a.grid().steps(); ++k) {
    sum += (a.state(k + 1) - b.state(k + 1)).dot(a.increments().col(k) - b.increments().col(k));
  }
  return sum;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryPair& traj) {
  const Eigen::Index d = traj.dimension();
  const Eigen::Index m = traj.grid().delay_steps();
  out << "t";
  for (Eigen::Index i = 0; i < d; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < d; ++i) out << ",k" << i;
  out << ",kvar\n";
  for (Eigen::Index c = 0; c < traj.grid().points(); ++c) {
    const Eigen::Index k = c - m;
    out << format_double(static_cast<double>(k) * traj.grid().dt());
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(traj.path()(i, c));
    if (k < 0) {
      for (Eigen::Index i = 0; i <= d; ++i) out << ',';
    } else {
      for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(traj.reflection()(i, k));
      out << ',' << format_double(traj.variation(0, k));
    }
    out << '\n';
  }
}

}  // namespace mvsde
