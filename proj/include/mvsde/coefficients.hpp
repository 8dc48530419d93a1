#pragma once

// Coefficient catalogue and approximation machinery: moduli of continuity,
// the segment mollifier, Monte Carlo smoothed coefficients and the norm
// cutoff.

#include "mvsde/law.hpp"
#include "mvsde/random.hpp"
#include "mvsde/segments.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>

namespace mvsde {

// Concave modulus kappa with kappa(0) = 0.
//   linear:        kappa(x) = L x
//   log_lipschitz: kappa(x) = x ln(1/x) on (0, eta], continued by its tangent
//                  at eta. For eta < 1/e the continuation is strictly
//                  increasing; at eta = 1/e it is flat.
struct ModulusKappa {
  enum class Kind { linear, log_lipschitz };

  static ModulusKappa linear(double slope);
  static ModulusKappa log_lipschitz(double eta);

  Kind kind = Kind::linear;
  double parameter = 1.0;
};

double eval_kappa(const ModulusKappa& kappa, double x);

// f(t, zeta) -> R^d (drift) or R^{d x m} (diffusion).
template <class Out>
struct PathCoefficient {
  std::function<Out(double, const SegmentView&)> eval;
  // sup |f| when known.
  std::optional<double> bound;
  // L with |f(zeta) - f(eta)|^2 <= L ||zeta - eta||^2 when known.
  std::optional<double> lipschitz_sq;

  Out operator()(double t, const SegmentView& seg) const { return eval(t, seg); }
};

using PathDrift = PathCoefficient<Vector>;
using PathDiffusion = PathCoefficient<Matrix>;

// b(t, zeta, mu) -> R^d or sigma(t, zeta, mu) -> R^{d x m}.
template <class Out>
struct MeanFieldCoefficient {
  std::function<Out(double, const SegmentView&, const LawView&)> eval;
  bool law_dependent = true;

  Out operator()(double t, const SegmentView& seg, const LawView& law) const { return eval(t, seg, law); }
};

using MeanFieldDrift = MeanFieldCoefficient<Vector>;
using MeanFieldDiffusion = MeanFieldCoefficient<Matrix>;

// phi_n(zeta)(s) = n int_s^{s+1/n} 1_{[-r0,1]}(r) (|zeta| ^ n)/|zeta| zeta(r ^ 0) dr,
// integrated exactly for the piecewise-linear interpolant of zeta.
Segment mollify_segment(const SegmentView& zeta, int n);

// f_n(t, zeta) = E f(t, phi_n(zeta) + W~(r0 + .)/n), estimated with mc_samples
// auxiliary Brownian paths drawn once from rng at construction. The result is
// a deterministic function of zeta and safe to share between threads.
template <class Out>
PathCoefficient<Out> smooth_coefficient(const PathCoefficient<Out>& f, const TimeGrid& grid, Eigen::Index dimension,
                                        int n, int mc_samples, RandomStream& rng);

// h(zeta) f(t, zeta), h = clamp(1 - (||zeta|| - radius)/ramp, 0, 1).
template <class Out>
PathCoefficient<Out> truncate_coefficient(const PathCoefficient<Out>& f, double radius, double ramp);

double cutoff_weight(double norm, double radius, double ramp);

// Lift a law-independent coefficient.
template <class Out>
MeanFieldCoefficient<Out> lift(const PathCoefficient<Out>& f) {
  MeanFieldCoefficient<Out> out;
  out.eval = [f](double t, const SegmentView& s, const LawView&) { return f(t, s); };
  out.law_dependent = false;
  return out;
}

// Freeze the law argument.
template <class Out>
PathCoefficient<Out> freeze(const MeanFieldCoefficient<Out>& b, const LawView& law) {
  PathCoefficient<Out> out;
  out.eval = [b, law](double t, const SegmentView& s) { return b(t, s, law); };
  return out;
}

// ---- catalogue -----------------------------------------------------------

PathDrift zero_drift(Eigen::Index d);
PathDrift constant_drift(const Vector& value);
// f(t, zeta) = -a zeta(0) + b zeta(-r0); L2 = 2(a^2 + b^2).
PathDrift linear_delay_drift(double a, double b);
// f(t, zeta) = -sign(zeta(0)) kappa(|zeta(0)| ^ 1), coordinatewise.
PathDrift log_lipschitz_drift(const ModulusKappa& kappa);

PathDiffusion zero_diffusion(Eigen::Index d, Eigen::Index m);
// sigma * I (d x m, ones on the leading diagonal).
PathDiffusion constant_diffusion(double sigma, Eigen::Index d, Eigen::Index m);

// b(t, zeta, mu) = -(zeta(0) - coupling * mu(functional)); functional is
// eval_end or eval_delay.
MeanFieldDrift mean_field_linear_drift(double coupling, LawFunctional functional);
// b(t, zeta, mu) = -zeta(0) / (1 + mu(||.||^2)).
MeanFieldDrift mean_field_second_moment_drift();

// Parameters for a named catalogue entry. Every key must be consumed;
// leftovers raise ConfigError naming the key.
class CoefficientParams {
 public:
  CoefficientParams(std::string section, std::map<std::string, std::string> values);

  double number(const std::string& key, double fallback) const;
  Vector vector(const std::string& key, const Vector& fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  void require_all_used() const;

 private:
  std::string section_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

PathDrift make_drift(const std::string& name, const CoefficientParams& params, Eigen::Index d);
PathDiffusion make_diffusion(const std::string& name, const CoefficientParams& params, Eigen::Index d,
                             Eigen::Index m);
// Mean-field names plus every path drift name (lifted).
MeanFieldDrift make_mean_field_drift(const std::string& name, const CoefficientParams& params, Eigen::Index d);
MeanFieldDiffusion make_mean_field_diffusion(const std::string& name, const CoefficientParams& params,
                                             Eigen::Index d, Eigen::Index m);

bool is_known_drift(const std::string& name);
bool is_known_diffusion(const std::string& name);

// ---- template definitions -------------------------------------------------

template <class Out>
PathCoefficient<Out> smooth_coefficient(const PathCoefficient<Out>& f, const TimeGrid& grid, Eigen::Index dimension,
                                        int n, int mc_samples, RandomStream& rng) {
  if (n < 1) throw InvalidArgument("smooth_coefficient: n must be >= 1");
  if (mc_samples < 1) throw InvalidArgument("smooth_coefficient: mc_samples must be >= 1");
  const double scale = std::sqrt(grid.dt());
  const Eigen::Index points = grid.segment_points();
  // W~(r0 + theta_j) = W~(j dt), W~(0) = 0, pre-divided by n.
  auto shifts = std::make_shared<std::vector<Matrix>>();
  shifts->reserve(static_cast<std::size_t>(mc_samples));
  for (int s = 0; s < mc_samples; ++s) {
    Matrix w = Matrix::Zero(dimension, points);
    for (Eigen::Index j = 1; j < points; ++j) {
      for (Eigen::Index i = 0; i < dimension; ++i) w(i, j) = w(i, j - 1) + scale * rng.normal();
    }
    shifts->push_back(w / static_cast<double>(n));
  }
  PathCoefficient<Out> out;
  out.bound = f.bound;
  out.eval = [f, shifts, n](double t, const SegmentView& zeta) -> Out {
    const Segment base = mollify_segment(zeta, n);
    Out acc;
    bool first = true;
    Matrix shifted;
    for (const Matrix& w : *shifts) {
      shifted = base.values() + w;
      const Segment s(base.grid(), shifted);
      if (first) {
        acc = f(t, s.view());
        first = false;
      } else {
        acc += f(t, s.view());
      }
    }
    return acc / static_cast<double>(shifts->size());
  };
  return out;
}

template <class Out>
PathCoefficient<Out> truncate_coefficient(const PathCoefficient<Out>& f, double radius, double ramp) {
  if (!(radius > 0.0) || !(ramp > 0.0)) throw InvalidArgument("truncate_coefficient: radius and ramp must be > 0");
  PathCoefficient<Out> out;
  out.bound = f.bound;
  out.eval = [f, radius, ramp](double t, const SegmentView& zeta) -> Out {
    const double h = cutoff_weight(sup_norm(zeta), radius, ramp);
    return h * f(t, zeta);
  };
  return out;
}

}  // namespace mvsde
