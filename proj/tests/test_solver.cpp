#include "mvsde/solver.hpp"
#include "mvsde/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mvsde;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

SolverConfig reflected(const TimeGrid& g) {
  return SolverConfig{g, Scheme::resolvent_step, NormalCone{ConvexDomain::halfline(0.0)}, 1e-9};
}

}  // namespace

TEST_CASE("one reflected step") {
  const SolverConfig cfg = reflected(TimeGrid(0.01, 0.0, 1.0));
  const StepResult r = euler_step(cfg, scalar(0.0), scalar(0.0), Matrix::Ones(1, 1), scalar(-0.3));
  CHECK(r.x_next(0) == 0.0);
  CHECK(r.dK(0) == doctest::Approx(-0.3));
  CHECK(increment_admissible(cfg, r.x_next, r.dK));
  CHECK_FALSE(increment_admissible(cfg, scalar(1.0), scalar(-0.3)));
  const StepResult inside = euler_step(cfg, scalar(1.0), scalar(2.0), Matrix::Ones(1, 1), scalar(0.1));
  CHECK(inside.x_next(0) == doctest::Approx(1.12));
  CHECK(inside.dK(0) == 0.0);
  CHECK_THROWS_AS(euler_step(cfg, scalar(-1.0), scalar(0.0), Matrix::Ones(1, 1), scalar(0.0)), DomainViolation);
}

TEST_CASE("graph step keeps dK in dt A(x_next)") {
  const TimeGrid g(0.1, 0.0, 1.0);
  const SolverConfig cfg{g, Scheme::resolvent_step, MonotoneGraph::sign(), 1e-9};
  const StepResult r = euler_step(cfg, scalar(0.0), scalar(0.0), Matrix::Ones(1, 1), scalar(0.05));
  // |p| <= dt: the step lands on 0 and dK = p.
  CHECK(r.x_next(0) == 0.0);
  CHECK(r.dK(0) == doctest::Approx(0.05));
  CHECK(increment_admissible(cfg, r.x_next, r.dK));
  const StepResult s = euler_step(cfg, scalar(1.0), scalar(0.0), Matrix::Ones(1, 1), scalar(0.0));
  CHECK(s.x_next(0) == doctest::Approx(0.9));
  CHECK(s.dK(0) == doctest::Approx(0.1));
}

TEST_CASE("project_then_step needs a cone") {
  SolverConfig cfg{TimeGrid(0.1, 0.0, 1.0), Scheme::project_then_step, MonotoneGraph::sign(), 1e-9};
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.op = NormalCone{ConvexDomain::halfline(0.0)};
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("coefficient failures carry the step index") {
  const TimeGrid g(0.1, 0.0, 1.0);
  const SolverConfig cfg{g};
  PathDrift f;
  f.eval = [](double t, const SegmentView& s) -> Vector {
    if (t > 0.45) throw std::runtime_error("boom");
    return Vector::Zero(s.dimension());
  };
  const NoisePath noise = NoisePath::generate(g, 1, 1, 0);
  try {
    solve_path(cfg, Segment::constant(g, scalar(0.0)), f, zero_diffusion(1, 1), noise);
    FAIL("expected StepError");
  } catch (const StepError& e) {
    CHECK(e.step() == 5);
  }
}

TEST_CASE("initial segment outside the domain is rejected") {
  const TimeGrid g(0.1, 0.2, 1.0);
  const NoisePath noise = NoisePath::generate(g, 1, 1, 0);
  CHECK_THROWS_AS(solve_path(reflected(g), Segment::constant(g, scalar(-0.5)), zero_drift(1),
                             constant_diffusion(1.0, 1, 1), noise),
                  DomainViolation);
}

TEST_CASE("frozen linear delay ODE: first Picard iterates by hand") {
  // A = 0, f = -zeta(-r0), g = 0, xi = 1.
  const TimeGrid g(0.01, 0.5, 1.0);
  const SolverConfig cfg{g};
  const NoisePath noise = NoisePath::generate(g, 1, 1, 0);
  const Segment xi = Segment::constant(g, scalar(1.0));
  const auto it = picard_iterate(cfg, xi, linear_delay_drift(0.0, -1.0), zero_diffusion(1, 1), noise, 2);
  for (Eigen::Index k = 0; k <= g.delay_steps(); ++k) {
    CHECK(it[0].state(k)(0) == doctest::Approx(1.0 - g.time(k)).epsilon(1e-12));
    CHECK(it[1].state(k)(0) == it[0].state(k)(0));
  }
}

TEST_CASE("segment-independent coefficients make every iterate equal") {
  const TimeGrid g(0.01, 0.1, 1.0);
  const NoisePath noise = NoisePath::generate(g, 1, 5, 0);
  const auto it = picard_iterate(reflected(g), Segment::constant(g, scalar(0.2)), constant_drift(scalar(-1.0)),
                                 constant_diffusion(0.7, 1, 1), noise, 3);
  CHECK(it[0].path() == it[1].path());
  CHECK(it[1].path() == it[2].path());
}

TEST_CASE("contraction report") {
  const TimeGrid g(0.1, 0.0, 1.0);
  const NoisePath noise = NoisePath::generate(g, 1, 5, 0);
  const Segment xi = Segment::constant(g, scalar(1.0));
  const auto same = picard_iterate(SolverConfig{g}, xi, constant_drift(scalar(1.0)), constant_diffusion(1, 1, 1),
                                   noise, 3);
  const ContractionReport r = contraction_report({same, same}, 5);
  CHECK(r.distance == std::vector<double>{0.0, 0.0});
  CHECK(std::isnan(r.ratio[0]));
  CHECK_THROWS_AS(contraction_report({same}, 5), InvalidArgument);
  CHECK_THROWS_AS(contraction_report({{same[0], same[1]}, {same[0], same[1]}}, 5), InvalidArgument);
}

TEST_CASE("smallness horizon solves the defining equation") {
  const double l2 = 0.625, c = 4.0;
  const double t0 = smallness_horizon(l2, c);
  CHECK(2.0 * (l2 + c * l2) * t0 * std::exp(2.0 * t0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::isinf(smallness_horizon(0.0, c)));
}

TEST_CASE("oracle: E|W(1)| and E W(1)^2 by direct simulation") {
  // Independent of the solver and of the project RNG.
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal;
  std::vector<double> a(200000), b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = normal(rng);
    a[i] = std::abs(w);
    b[i] = w * w;
  }
  const MeanEstimate ea = estimate_mean(a), eb = estimate_mean(b);
  CHECK(std::abs(ea.mean - std::sqrt(2.0 / std::numbers::pi)) <= 3.0 * ea.std_error);
  CHECK(std::abs(eb.mean - 1.0) <= 3.0 * eb.std_error);
}

TEST_CASE("reflected Euler bias shrinks like sqrt(dt)") {
  // Same Brownian increments drive the scheme at dt and, summed, |W(1)|;
  // the mean gap is the scheme's discretization bias.
  const auto gap = [](double dt) {
    const TimeGrid g(dt, 0.0, 1.0);
    const SolverConfig cfg = reflected(g);
    std::vector<double> d(2000);
    for (std::size_t p = 0; p < d.size(); ++p) {
      const NoisePath noise = NoisePath::generate(g, 1, 77, p);
      const auto t = solve_path(cfg, Segment::constant(g, scalar(0.0)), zero_drift(1), constant_diffusion(1, 1, 1),
                                noise);
      d[p] = t.state(g.steps())(0) - std::abs(noise.increments.sum());
    }
    return estimate_mean(d).mean;
  };
  const double coarse = gap(1e-2), fine = gap(1e-3);
  CHECK(coarse < 0.0);
  CHECK(fine < 0.0);
  CHECK(coarse / fine == doctest::Approx(std::sqrt(10.0)).epsilon(0.35));
}

TEST_CASE("property: conservation, domain invariance and membership") {
  const TimeGrid g(0.01, 0.05, 0.5);
  const std::vector<MonotoneOperator> ops = {
      NormalCone{ConvexDomain::box(Vector::Constant(2, -0.5), Vector::Constant(2, 0.5))},
      NormalCone{ConvexDomain::ball(Vector::Zero(2), 0.3)},
      NormalCone{ConvexDomain::halfspace(Vector::Ones(2), 0.0)},
      MonotoneGraph::sign(),
      MonotoneGraph({{-0.2, -1.0}, {0.0, 0.0}, {0.1, 0.5}}, GraphEnd{true, 0.0}, GraphEnd{true, 0.0}),
  };
  RandomStream rng(99, Stream::instance, 0);
  for (const auto& op : ops) {
    for (Scheme scheme : {Scheme::resolvent_step, Scheme::project_then_step}) {
      SolverConfig cfg{g, scheme, op, 1e-9};
      if (scheme == Scheme::project_then_step && !is_normal_cone_or_zero(op)) continue;
      for (std::size_t p = 0; p < 20; ++p) {
        const double a = 3.0 * rng.uniform(), b = 3.0 * (rng.uniform() - 0.5);
        const NoisePath noise = NoisePath::generate(g, 2, 4, p);
        const Segment xi = Segment::constant(g, Vector::Zero(2));
        const auto t = solve_path(cfg, xi, linear_delay_drift(a, b), constant_diffusion(2.0, 2, 2), noise);
        for (Eigen::Index k = 0; k < g.steps(); ++k) {
          const Vector x = t.state(k), x1 = t.state(k + 1);
          const Vector pred = x + (-a * x + b * t.segment(k).delayed()) * g.dt() + 2.0 * noise.increments.col(k);
          CHECK((x1 + t.increments().col(k) - pred).norm() <= 1e-14 * (1.0 + pred.norm()));
          CHECK(domain_distance(op, x1) <= 1e-12);
          CHECK(increment_admissible(cfg, x1, t.increments().col(k)));
        }
      }
    }
  }
}

TEST_CASE("property: discrete pathwise uniqueness") {
  const TimeGrid g(0.02, 0.1, 1.0);
  const SolverConfig cfg = reflected(g);
  for (std::size_t p = 0; p < 10; ++p) {
    const NoisePath noise = NoisePath::generate(g, 1, 3, p);
    const Segment xi = Segment::constant(g, scalar(0.5));
    Matrix far = Matrix::Constant(1, g.points(), 0.0);
    far.leftCols(g.segment_points()) = xi.values();
    const TrajectoryPair zeroth(g, far, Matrix::Zero(1, g.steps()));
    const auto f = linear_delay_drift(1.0, 0.5);
    const auto s = constant_diffusion(0.5, 1, 1);
    const auto a = picard_iterate(cfg, xi, f, s, noise, 40);
    const auto b = picard_iterate(cfg, xi, f, s, noise, 40, &zeroth);
    CHECK(path_sup_distance(a.back(), b.back()) <= 1e-8);
    // Both limits solve the same scheme, so they match the direct solve.
    CHECK(path_sup_distance(a.back(), solve_path(cfg, xi, f, s, noise)) <= 1e-8);
    CHECK(increment_coupling(a.back(), b.back()) >= -1e-12);
  }
}
