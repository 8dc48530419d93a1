#pragma once

// Empirical laws of delay segments: N equally weighted segments standing in
// for a measure on the path space.

#include "mvsde/segments.hpp"

#include <string_view>
#include <vector>

namespace mvsde {

enum class LawFunctional {
  sup_sq,      // ||.||_inf^2
  eval_end,    // eta -> eta(0)
  eval_delay,  // eta -> eta(-r0)
};

// Throws InvalidArgument for unknown names.
LawFunctional parse_law_functional(std::string_view name);
std::string_view to_string(LawFunctional f);

class EmpiricalSegmentLaw {
 public:
  explicit EmpiricalSegmentLaw(std::vector<Segment> segments);

  std::size_t size() const { return segments_.size(); }
  const Segment& segment(std::size_t i) const { return segments_[i]; }
  const std::vector<Segment>& segments() const { return segments_; }
  const TimeGrid& grid() const { return segments_.front().grid(); }
  Eigen::Index dimension() const { return segments_.front().dimension(); }

 private:
  std::vector<Segment> segments_;
};

// Uniform average of a functional. sup_sq yields a size-1 vector.
Vector empirical_moment(const EmpiricalSegmentLaw& law, LawFunctional f);

// The three catalogue functionals, evaluated once per law.
struct LawMoments {
  double sup_sq = 0.0;
  Vector end_mean;
  Vector delay_mean;
};

// Moments of the segments at step k of a set of equally weighted paths,
// summed pairwise over particle index.
LawMoments path_moments(const TimeGrid& grid, const std::vector<Matrix>& paths, Eigen::Index k);
LawMoments law_moments(const EmpiricalSegmentLaw& law);

// Read-only view of one empirical law, handed to mean-field coefficients.
// It is backed either by an EmpiricalSegmentLaw or by columns of particle
// paths at a fixed step; the referenced storage must outlive the view.
class LawView {
 public:
  LawView(const EmpiricalSegmentLaw& law, const LawMoments& moments);
  LawView(const TimeGrid& grid, const std::vector<Matrix>& paths, Eigen::Index step, const LawMoments& moments);

  std::size_t size() const;
  SegmentView segment(std::size_t i) const;
  const LawMoments& moments() const { return *moments_; }
  // mu(f) for a catalogue functional.
  Vector moment(LawFunctional f) const;
  EmpiricalSegmentLaw materialize() const;

 private:
  const EmpiricalSegmentLaw* law_ = nullptr;
  const std::vector<Matrix>* paths_ = nullptr;
  TimeGrid grid_ = TimeGrid::from_steps(1.0, 0, 1);
  Eigen::Index step_ = 0;
  const LawMoments* moments_ = nullptr;
};

}  // namespace mvsde
