#include "mvsde/random.hpp"
#include "mvsde/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace mvsde;

TEST_CASE("philox4x32-10 known answers") {
  // Reference vectors published with the Random123 library.
  const auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  const auto ones = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(ones == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  const auto pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  CHECK(pi == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  RandomStream a(42, Stream::brownian, 3), b(42, Stream::brownian, 3), c(42, Stream::brownian, 4),
      d(42, Stream::initial, 3);
  bool differ_path = false, differ_stream = false;
  for (int i = 0; i < 16; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    differ_path = differ_path || x != c.normal();
    differ_stream = differ_stream || x != d.normal();
  }
  CHECK(differ_path);
  CHECK(differ_stream);
}

TEST_CASE("uniforms lie in (0, 1], normals have unit variance") {
  RandomStream rng(1, Stream::instance, 0);
  std::vector<double> z(200000);
  for (auto& x : z) {
    const double u = rng.uniform();
    CHECK_UNARY(u > 0.0 && u <= 1.0);
    x = rng.normal();
  }
  const MeanEstimate e = estimate_mean(z);
  CHECK(std::abs(e.mean) < 5.0 * e.std_error + 1e-12);
  CHECK(std::abs(e.variance - 1.0) < 0.02);
}

TEST_CASE("noise paths scale with dt") {
  const TimeGrid g(0.01, 0.0, 1.0);
  const NoisePath n = NoisePath::generate(g, 2, 9, 0);
  CHECK(n.dimension() == 2);
  CHECK(n.steps() == 100);
  const NoisePath again = NoisePath::generate(g, 2, 9, 0);
  CHECK(n.increments == again.increments);
  std::vector<double> sq;
  for (std::size_t p = 0; p < 400; ++p) {
    const NoisePath w = NoisePath::generate(g, 1, 9, p);
    sq.push_back(w.increments.array().square().sum());
  }
  // E sum dW^2 = T
  const MeanEstimate e = estimate_mean(sq);
  CHECK(std::abs(e.mean - 1.0) < 4.0 * e.std_error);
}

TEST_CASE("pairwise sum is exact on small integers") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  CHECK(pairwise_sum(v) == 499500.0);
}
