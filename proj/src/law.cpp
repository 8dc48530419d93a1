#include "mvsde/law.hpp"

#include "mvsde/stats.hpp"

namespace mvsde {

namespace {

// Pairwise sum of columns, same tree shape as pairwise_sum.
Vector pairwise_column_sum(const Matrix& cols, Eigen::Index begin, Eigen::Index end) {
  if (end - begin <= 8) {
    Vector s = Vector::Zero(cols.rows());
    for (Eigen::Index i = begin; i < end; ++i) s += cols.col(i);
    return s;
  }
  const Eigen::Index half = (end - begin) / 2;
  return pairwise_column_sum(cols, begin, begin + half) + pairwise_column_sum(cols, begin + half, end);
}

LawMoments moments_from(const std::vector<double>& sup_sq, const Matrix& ends, const Matrix& delays) {
  const double n = static_cast<double>(sup_sq.size());
  LawMoments m;
  m.sup_sq = pairwise_sum(sup_sq) / n;
  m.end_mean = pairwise_column_sum(ends, 0, ends.cols()) / n;
  m.delay_mean = pairwise_column_sum(delays, 0, delays.cols()) / n;
  return m;
}

}  // namespace

LawFunctional parse_law_functional(std::string_view name) {
  if (name == "sup_sq") return LawFunctional::sup_sq;
  if (name == "eval_end") return LawFunctional::eval_end;
  if (name == "eval_delay") return LawFunctional::eval_delay;
  throw InvalidArgument("unknown law functional '" + std::string(name) + "'");
}

std::string_view to_string(LawFunctional f) {
  switch (f) {
    case LawFunctional::sup_sq:
      return "sup_sq";
    case LawFunctional::eval_end:
      return "eval_end";
    case LawFunctional::eval_delay:
      return "eval_delay";
  }
  return "unknown";
}

EmpiricalSegmentLaw::EmpiricalSegmentLaw(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw InvalidArgument("empirical law needs at least one segment");
  for (const auto& s : segments_) {
    if (!(s.grid() == segments_.front().grid()) || s.dimension() != segments_.front().dimension()) {
      throw InvalidArgument("empirical law segments must share grid and dimension");
    }
  }
}

LawMoments law_moments(const EmpiricalSegmentLaw& law) {
  const std::size_t n = law.size();
  std::vector<double> sup_sq(n);
  Matrix ends(law.dimension(), static_cast<Eigen::Index>(n));
  Matrix delays(law.dimension(), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const SegmentView s = law.segment(i).view();
    const double r = sup_norm(s);
    sup_sq[i] = r * r;
    ends.col(static_cast<Eigen::Index>(i)) = s.end();
    delays.col(static_cast<Eigen::Index>(i)) = s.delayed();
  }
  return moments_from(sup_sq, ends, delays);
}

Vector empirical_moment(const EmpiricalSegmentLaw& law, LawFunctional f) {
  const LawMoments m = law_moments(law);
  switch (f) {
    case LawFunctional::sup_sq:
      return Vector::Constant(1, m.sup_sq);
    case LawFunctional::eval_end:
      return m.end_mean;
    case LawFunctional::eval_delay:
      return m.delay_mean;
  }
  throw InvalidArgument("unknown law functional");
}

LawMoments path_moments(const TimeGrid& grid, const std::vector<Matrix>& paths, Eigen::Index k) {
  if (paths.empty()) throw InvalidArgument("path_moments: no particles");
  const Eigen::Index m = grid.delay_steps();
  const Eigen::Index d = paths.front().rows();
  std::vector<double> sup_sq(paths.size());
  Matrix ends(d, static_cast<Eigen::Index>(paths.size()));
  Matrix delays(d, static_cast<Eigen::Index>(paths.size()));
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto window = paths[i].middleCols(k, m + 1);
    sup_sq[i] = window.colwise().squaredNorm().maxCoeff();
    ends.col(static_cast<Eigen::Index>(i)) = window.col(m);
    delays.col(static_cast<Eigen::Index>(i)) = window.col(0);
  }
  return moments_from(sup_sq, ends, delays);
}

LawView::LawView(const EmpiricalSegmentLaw& law, const LawMoments& moments)
    : law_(&law), grid_(law.grid()), moments_(&moments) {}

LawView::LawView(const TimeGrid& grid, const std::vector<Matrix>& paths, Eigen::Index step,
                 const LawMoments& moments)
    : paths_(&paths), grid_(grid), step_(step), moments_(&moments) {
  if (paths.empty()) throw InvalidArgument("law view over zero particles");
}

std::size_t LawView::size() const { return law_ != nullptr ? law_->size() : paths_->size(); }

SegmentView LawView::segment(std::size_t i) const {
  if (law_ != nullptr) return law_->segment(i).view();
  const Matrix& p = (*paths_)[i];
  return SegmentView(grid_, ConstMatrixMap(p.data() + step_ * p.rows(), p.rows(), grid_.segment_points(),
                                           Eigen::OuterStride<>(p.rows())));
}

Vector LawView::moment(LawFunctional f) const {
  switch (f) {
    case LawFunctional::sup_sq:
      return Vector::Constant(1, moments_->sup_sq);
    case LawFunctional::eval_end:
      return moments_->end_mean;
    case LawFunctional::eval_delay:
      return moments_->delay_mean;
  }
  throw InvalidArgument("unknown law functional");
}

EmpiricalSegmentLaw LawView::materialize() const {
  std::vector<Segment> segs;
  segs.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const SegmentView v = segment(i);
    segs.emplace_back(v.grid(), Matrix(v.values()));
  }
  return EmpiricalSegmentLaw(std::move(segs));
}

}  // namespace mvsde
