#include "mvsde/assignment.hpp"
#include "mvsde/meanfield.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace mvsde;

namespace {

const TimeGrid kGrid(0.5, 1.0, 1.0);

std::vector<Segment> random_law(RandomStream& rng, std::size_t n, Eigen::Index d = 2) {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < n; ++i) {
    Matrix v(d, kGrid.segment_points());
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.normal();
    out.emplace_back(kGrid, v);
  }
  return out;
}

double brute_force(const std::vector<Segment>& a, const std::vector<Segment>& b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const double s = sup_distance(a[i], b[perm[i]]);
      total += s * s;
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / double(a.size()));
}

Segment seg_ending(double x, double y) {
  Matrix v = Matrix::Zero(2, kGrid.segment_points());
  v.col(v.cols() - 1) << x, y;
  return Segment(kGrid, v);
}

}  // namespace

TEST_CASE("empirical moments") {
  const EmpiricalSegmentLaw zero({Segment::constant(kGrid, Vector::Zero(1))});
  CHECK(empirical_moment(zero, LawFunctional::sup_sq)(0) == 0.0);
  Matrix one = Matrix::Zero(1, 3), three = Matrix::Zero(1, 3);
  one(0, 1) = -1.0;
  three(0, 2) = 3.0;
  const EmpiricalSegmentLaw two({Segment(kGrid, one), Segment(kGrid, three)});
  CHECK(empirical_moment(two, LawFunctional::sup_sq)(0) == 5.0);
  const EmpiricalSegmentLaw ends({seg_ending(1, 0), seg_ending(0, 1)});
  CHECK(empirical_moment(ends, LawFunctional::eval_end) == Vector::Constant(2, 0.5));
  CHECK_THROWS_AS(parse_law_functional("median"), InvalidArgument);
}

TEST_CASE("assignment solver") {
  Matrix c(4, 4);
  c << 82, 83, 69, 92,
       77, 37, 49, 92,
       11, 69, 5, 86,
       8, 9, 98, 23;
  const Assignment a = solve_assignment(c);
  CHECK(a.cost == 140.0);
  CHECK(assignment_cost(c, a.column_of) == 140.0);
  CHECK(greedy_assignment(c).cost >= 140.0);
}

TEST_CASE("W2 small examples") {
  RandomStream rng(1, Stream::instance, 0);
  const auto a = random_law(rng, 5);
  CHECK(wasserstein2(EmpiricalSegmentLaw(a), EmpiricalSegmentLaw(a)) == 0.0);
  const auto x = random_law(rng, 1), y = random_law(rng, 1);
  CHECK(wasserstein2(EmpiricalSegmentLaw(x), EmpiricalSegmentLaw(y)) == doctest::Approx(sup_distance(x[0], y[0])));
  CHECK_THROWS_AS(wasserstein2(EmpiricalSegmentLaw(a), EmpiricalSegmentLaw(x)), InvalidArgument);
  const TimeGrid other(0.25, 1.0, 1.0);
  const EmpiricalSegmentLaw z({Segment::constant(other, Vector::Zero(2))});
  CHECK_THROWS_AS(wasserstein2(EmpiricalSegmentLaw(x), z), InvalidArgument);
}

TEST_CASE("oracle: W2 equals brute force for N <= 6") {
  RandomStream rng(2, Stream::instance, 0);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + i % 6;
    const auto a = random_law(rng, n), b = random_law(rng, n);
    CHECK(std::abs(wasserstein2(EmpiricalSegmentLaw(a), EmpiricalSegmentLaw(b)) - brute_force(a, b)) <= 1e-12);
  }
}

TEST_CASE("property: W2 metric axioms and coupling bound") {
  RandomStream rng(3, Stream::instance, 0);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_law(rng, 16), b = random_law(rng, 16), c = random_law(rng, 16);
    const EmpiricalSegmentLaw la(a), lb(b), lc(c);
    const double ab = wasserstein2(la, lb);
    CHECK(ab == wasserstein2(lb, la));
    CHECK(ab > 0.0);
    CHECK(wasserstein2(la, lc) <= ab + wasserstein2(lb, lc) + 1e-9);
    double identity = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) identity += std::pow(sup_distance(a[k], b[k]), 2);
    CHECK(ab * ab <= identity / 16.0 + 1e-12);
  }
}

TEST_CASE("greedy above the cap is an upper bound") {
  RandomStream rng(4, Stream::instance, 0);
  const EmpiricalSegmentLaw a(random_law(rng, 12)), b(random_law(rng, 12));
  const auto ma = law_moments(a), mb = law_moments(b);
  const auto exact = wasserstein2_detailed(LawView(a, ma), LawView(b, mb));
  const auto greedy = wasserstein2_detailed(LawView(a, ma), LawView(b, mb), 4);
  CHECK(exact.exact);
  CHECK_FALSE(greedy.exact);
  CHECK(greedy.distance >= exact.distance - 1e-15);
}

namespace {

struct Setup {
  TimeGrid grid = TimeGrid(0.02, 0.2, 1.0);
  SolverConfig cfg{grid};
  std::vector<Segment> xi;
  std::vector<NoisePath> noises;

  Setup(std::size_t n, double spread) {
    RandomStream rng(8, Stream::initial, 0);
    for (std::size_t i = 0; i < n; ++i) {
      xi.push_back(Segment::constant(grid, Vector::Constant(1, 1.0 + spread * rng.normal())));
      noises.push_back(NoisePath::generate(grid, 1, 8, i));
    }
  }
};

}  // namespace

TEST_CASE("law-independent coefficients: frozen solve equals independent paths") {
  Setup s(6, 0.3);
  const auto f = linear_delay_drift(1.0, 0.5);
  const auto g = constant_diffusion(0.4, 1, 1);
  const MeasureFlow flow = MeasureFlow::from_initial(s.grid, s.xi);
  const auto ens = solve_ensemble_frozen(s.cfg, s.xi, lift(f), lift(g), flow, s.noises, 3);
  const auto sc = self_consistent_solve(s.cfg, s.xi, lift(f), lift(g), s.noises, 2);
  for (std::size_t i = 0; i < s.xi.size(); ++i) {
    const auto direct = solve_path(s.cfg, s.xi[i], f, g, s.noises[i]);
    CHECK(ens[i].path() == direct.path());
    CHECK(sc.ensemble[i].path() == direct.path());
  }
  const auto it = distribution_iterate(s.cfg, s.xi, lift(f), lift(g), 3, s.noises);
  CHECK(it.flows[1].paths() == it.flows[2].paths());
  CHECK(it.flows[2].paths() == it.flows[3].paths());
}

TEST_CASE("frozen point mass at zero gives exponential decay") {
  const TimeGrid g(0.001, 0.0, 1.0);
  const SolverConfig cfg{g};
  const std::vector<Segment> xi = {Segment::constant(g, Vector::Ones(1))};
  const MeasureFlow zero(g, {Matrix::Zero(1, g.points())});
  const auto b = mean_field_linear_drift(0.0, LawFunctional::eval_end);
  const auto ens = solve_ensemble_frozen(cfg, xi, b, lift(zero_diffusion(1, 1)), zero,
                                         {NoisePath::generate(g, 1, 1, 0)});
  for (Eigen::Index k = 0; k <= g.steps(); k += 100) {
    CHECK(std::abs(ens[0].state(k)(0) - std::exp(-g.time(k))) <= g.dt());
  }
}

TEST_CASE("identical deterministic particles stay identical") {
  Setup s(5, 0.0);
  const auto b = mean_field_linear_drift(1.0, LawFunctional::eval_end);
  const auto it = distribution_iterate(s.cfg, s.xi, b, lift(zero_diffusion(1, 1)), 3, s.noises);
  for (const auto& p : it.flows.back().paths()) CHECK(p == it.flows.back().paths().front());
}

TEST_CASE("two interacting particles keep their mean") {
  const TimeGrid g(0.01, 0.0, 1.0);
  const SolverConfig cfg{g};
  const std::vector<Segment> xi = {Segment::constant(g, Vector::Constant(1, 2.0)),
                                   Segment::constant(g, Vector::Constant(1, -1.0))};
  const auto b = mean_field_linear_drift(1.0, LawFunctional::eval_end);
  const std::vector<NoisePath> noises = {NoisePath::generate(g, 1, 1, 0), NoisePath::generate(g, 1, 1, 1)};
  const auto sc = self_consistent_solve(cfg, xi, b, lift(zero_diffusion(1, 1)), noises);
  for (Eigen::Index k = 0; k <= g.steps(); ++k) {
    CHECK(sc.ensemble[0].state(k)(0) + sc.ensemble[1].state(k)(0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("distribution iteration contracts and is thread independent") {
  Setup s(32, 0.25);
  const auto b = mean_field_linear_drift(1.0, LawFunctional::eval_delay);
  const auto sig = lift(constant_diffusion(0.5, 1, 1));
  const auto one = distribution_iterate(s.cfg, s.xi, b, sig, 6, s.noises, 1);
  const auto four = distribution_iterate(s.cfg, s.xi, b, sig, 6, s.noises, 4);
  for (std::size_t n = 0; n < one.flows.size(); ++n) CHECK(one.flows[n].paths() == four.flows[n].paths());
  std::vector<double> gaps;
  for (std::size_t n = 1; n + 1 < one.flows.size(); ++n) {
    const auto d = flow_distance(one.flows[n], one.flows[n + 1], 2);
    gaps.push_back(*std::max_element(d.begin(), d.end()));
  }
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i) CHECK(gaps[i + 1] < gaps[i]);
  for (std::size_t n = 0; n < one.flows.size(); ++n) {
    for (Eigen::Index k = 0; k <= s.grid.steps(); ++k) CHECK(one.flows[n].moments(k).sup_sq < 100.0);
  }
}
