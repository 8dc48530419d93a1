#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mvsde {

// Pairwise summation in index order; the reduction tree depends only on the
// length, so sums are reproducible regardless of how values were produced.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;  // unbiased sample variance
};

inline MeanEstimate estimate_mean(std::span<const double> v) {
  MeanEstimate e;
  if (v.empty()) return e;
  const double n = static_cast<double>(v.size());
  e.mean = pairwise_sum(v) / n;
  if (v.size() > 1) {
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - e.mean) * (v[i] - e.mean);
    e.variance = pairwise_sum(sq) / (n - 1.0);
    e.std_error = std::sqrt(e.variance / n);
  }
  return e;
}

}  // namespace mvsde
