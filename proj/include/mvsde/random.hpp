#pragma once

// Counter-based random numbers keyed by (seed, stream, path). Any draw is a
// pure function of its key and counter, so results do not depend on how
// paths are spread across threads.

#include "mvsde/segments.hpp"
#include "mvsde/types.hpp"

#include <array>
#include <cstdint>

namespace mvsde {

// Independent purposes get independent streams.
enum class Stream : std::uint64_t {
  brownian = 1,
  initial = 2,
  auxiliary = 3,
  instance = 4,
};

std::uint64_t splitmix64(std::uint64_t x);

// Philox4x32-10 block cipher.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

// Sequential view of one (seed, stream, path) substream.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, Stream stream, std::uint64_t path);

  // Uniform on (0, 1].
  double uniform();
  // Standard normal via Box-Muller; values come in pairs per counter block.
  double normal();

 private:
  std::array<std::uint32_t, 4> next_block();

  std::array<std::uint32_t, 2> key_{};
  std::uint64_t path_ = 0;
  std::uint64_t counter_ = 0;
  std::array<double, 2> uniform_cache_{};
  int uniform_left_ = 0;
  double normal_cache_ = 0.0;
  bool has_normal_ = false;
};

// Brownian increments dW_k ~ Normal(0, dt I_m), k = 0..n-1, stored column-wise
// (m x n) so every Picard or distribution iterate reuses the same draws.
struct NoisePath {
  Matrix increments;

  Eigen::Index dimension() const { return increments.rows(); }
  Eigen::Index steps() const { return increments.cols(); }

  static NoisePath generate(const TimeGrid& grid, Eigen::Index brownian_dim, std::uint64_t seed,
                            std::uint64_t path_index);
};

}  // namespace mvsde
