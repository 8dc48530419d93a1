#include "mvsde/random.hpp"

#include <cmath>
#include <numbers>

namespace mvsde {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  // 53 random bits mapped to (0, 1].
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  return c;
}

RandomStream::RandomStream(std::uint64_t seed, Stream stream, std::uint64_t path) : path_(path) {
  const std::uint64_t k = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

std::array<std::uint32_t, 4> RandomStream::next_block() {
  const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(counter_),
                                            static_cast<std::uint32_t>(counter_ >> 32),
                                            static_cast<std::uint32_t>(path_),
                                            static_cast<std::uint32_t>(path_ >> 32)};
  ++counter_;
  return philox4x32(ctr, key_);
}

double RandomStream::uniform() {
  if (uniform_left_ == 0) {
    const auto b = next_block();
    uniform_cache_ = {to_unit(b[0], b[1]), to_unit(b[2], b[3])};
    uniform_left_ = 2;
  }
  return uniform_cache_[2 - uniform_left_--];
}

double RandomStream::normal() {
  if (has_normal_) {
    has_normal_ = false;
    return normal_cache_;
  }
  const auto b = next_block();
  const double u1 = to_unit(b[0], b[1]);
  const double u2 = to_unit(b[2], b[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  normal_cache_ = r * std::sin(a);
  has_normal_ = true;
  return r * std::cos(a);
}

NoisePath NoisePath::generate(const TimeGrid& grid, Eigen::Index brownian_dim, std::uint64_t seed,
                              std::uint64_t path_index) {
  if (brownian_dim < 1) throw InvalidArgument("Brownian dimension must be >= 1");
  RandomStream rng(seed, Stream::brownian, path_index);
  const double scale = std::sqrt(grid.dt());
  NoisePath out;
  out.increments.resize(brownian_dim, grid.steps());
  for (Eigen::Index k = 0; k < grid.steps(); ++k) {
    for (Eigen::Index i = 0; i < brownian_dim; ++i) out.increments(i, k) = scale * rng.normal();
  }
  return out;
}

}  // namespace mvsde
