#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "tpdo/hyperbolic.hpp"

using namespace tpdo;

namespace {

GridFunction random_band_limited(const TorusGrid& grid, int cutoff, std::uint64_t seed) {
  auto gen = oracle::rng(seed);
  SpectralFunction s(FrequencyWindow(grid.dim(), cutoff, true));
  for (auto& c : s.coeffs()) c = oracle::random_complex(gen);
  return inverse_transform(s, grid);
}

double max_diff(const GridFunction& a, const GridFunction& b) { return (a - b).max_abs(); }

const LatticeMultiplier transport = [](const LatticePoint& k) { return static_cast<double>(k[0]); };
const LatticeMultiplier modulus = [](const LatticePoint& k) {
  double s = 0.0;
  for (int j = 0; j < k.size(); ++j) s += static_cast<double>(k[j]) * k[j];
  return std::sqrt(s);
};

// transport plus an x-dependent order-zero perturbation that does not commute with D
HyperbolicProblem perturbed_preset() {
  TorusGrid g(1, 32);
  HyperbolicProblem p;
  p.a1 = transport;
  p.a0 = ToroidalSymbol(1, [](const RealPoint& x, const LatticePoint& xi) {
    return Complex(0.3 * (1.0 + std::cos(x[0])), 0.0) + Complex(0.2 * std::sin(x[0]), 0.0) / japanese_bracket(xi);
  });
  p.initial = random_band_limited(g, 6, 31);
  p.t_final = 1.0;
  p.dt = 1.0 / 40;
  return p;
}

}  // namespace

TEST_CASE("solve_constant") {
  TorusGrid g(1, 16);
  auto f = GridFunction::sample(g, [](const RealPoint& x) { return std::polar(1.0, x[0]); });
  for (double t : {0.0, 0.7, 3.1, -2.0}) {
    auto u = solve_constant(transport, f, t);
    auto exact = GridFunction::sample(g, [t](const RealPoint& x) { return std::polar(1.0, x[0] - t); });
    CHECK(max_diff(u, exact) < 1e-13);
  }
  CHECK(max_diff(solve_constant(modulus, f, 0.0), f) < 1e-14);

  auto r = random_band_limited(TorusGrid(1, 64), 20, 3);
  for (double t : {0.1, 1.0, 10.0}) CHECK(std::abs(l2_norm(solve_constant(modulus, r, t)) - l2_norm(r)) < 1e-12);

  // group property
  const auto st = solve_constant(modulus, solve_constant(modulus, r, 0.4), 1.3);
  CHECK(max_diff(st, solve_constant(modulus, r, 1.7)) < 1e-12);

  // translation by a grid-aligned v t in two dimensions
  TorusGrid g2(2, 16);
  auto f2 = random_band_limited(g2, 5, 4);
  LatticeMultiplier velocity = [](const LatticePoint& k) { return 1.0 * k[0] - 2.0 * k[1]; };
  const double t = 3 * g2.spacing();
  auto u2 = solve_constant(velocity, f2, t);
  for (std::size_t i = 0; i < g2.size(); ++i) {
    const LatticePoint j = g2.node_index(i);
    const LatticePoint src{(j[0] - 3 + 16) % 16, (j[1] + 6) % 16};
    CHECK(std::abs(u2[i] - f2[g2.linear_index(src)]) < 1e-12);
  }
}

TEST_CASE("solve_perturbed without a0 is the exact propagator") {
  TorusGrid g(1, 64);
  HyperbolicProblem p;
  p.a1 = modulus;
  p.initial = random_band_limited(g, 24, 5);
  p.t_final = 2.0;
  p.dt = 1.0 / 64;
  p.snapshot_times = uniform_schedule(2.0, 4);
  auto trace = solve_perturbed(p);
  REQUIRE(trace.times.size() == 5);
  CHECK(trace.times.front() == 0.0);
  CHECK(max_diff(trace.snapshots.front(), p.initial) == 0.0);
  for (std::size_t s = 1; s < trace.times.size(); ++s) {
    CHECK(trace.times[s] > trace.times[s - 1]);
    CHECK(max_diff(trace.snapshots[s], solve_constant(modulus, p.initial, trace.times[s])) < 1e-12);
  }
  for (double e : energy(trace)) CHECK(std::abs(e - l2_norm(p.initial)) < 1e-12);
  CHECK(self_convergence(p, 2).exact);

  HyperbolicProblem zero = p;
  zero.initial = GridFunction(g);
  for (double e : energy(solve_perturbed(zero))) CHECK(e == 0.0);
}

TEST_CASE("transport identity") {
  TorusGrid g(1, 64);
  HyperbolicProblem p;
  p.a1 = transport;
  p.initial = random_band_limited(g, 30, 6);
  p.t_final = 5 * g.spacing();
  p.dt = 1.0 / 128;
  const auto u = solve_perturbed(p).snapshots.back();
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(u[i] - p.initial[(i + 59) % 64]) < 1e-10);
}

TEST_CASE("multiplication perturbation") {
  TorusGrid g(1, 32);
  auto sigma = [](const RealPoint& x) { return 0.5 + std::cos(x[0]); };
  HyperbolicProblem p;
  p.a1 = [](const LatticePoint&) { return 0.0; };
  p.a0 = ToroidalSymbol(1, [sigma](const RealPoint& x, const LatticePoint&) { return Complex(sigma(x)); });
  p.initial = random_band_limited(g, 8, 7);
  p.t_final = 1.0;
  p.dt = 1e-3;
  auto trace = solve_perturbed(p);
  GridFunction exact(g);
  for (std::size_t i = 0; i < g.size(); ++i) exact[i] = std::polar(1.0, -sigma(g.node(i))) * p.initial[i];
  CHECK(max_diff(trace.snapshots.back(), exact) < 1e-6);
  CHECK(std::abs(trace.norms.back() - trace.norms.front()) < 1e-10);
}

TEST_CASE("splitting self-convergence") {
  auto study = self_convergence(perturbed_preset(), 3);
  CHECK_FALSE(study.exact);
  REQUIRE(study.orders.size() == 2);
  for (double q : study.orders) CHECK(q >= 1.9);
}

TEST_CASE("solver guards") {
  auto p = perturbed_preset();
  p.dt = 0.05;  // 0.05 * 16 > 0.5
  CHECK_THROWS_AS(solve_perturbed(p), InvalidArgument);
  p = perturbed_preset();
  p.snapshot_times = {0.5, 0.2};
  CHECK_THROWS_AS(solve_perturbed(p), InvalidArgument);
  p = perturbed_preset();
  p.a0 = ToroidalSymbol(1, [](const RealPoint&, const LatticePoint&) { return Complex(1e300); });
  CHECK_THROWS_AS(solve_perturbed(p), Error);
  p = perturbed_preset();
  p.dt = 0.0;
  CHECK_THROWS_AS(solve_perturbed(p), InvalidArgument);
}

TEST_CASE("periodise_problem") {
  TorusGrid g(1, 32);
  const double h = kTwoPi / 64;
  auto gauss = [](double c) {
    return [c](const RealPoint& x) { return Complex(std::exp(-(x[0] - c) * (x[0] - c) / (2 * 0.09))); };
  };
  auto f = CompactFunction::sample(gauss(0.0), RealBox{{-kPi}, {kPi}}, h);
  auto p = periodise_problem([](const RealPoint& k) { return k[0]; }, std::nullopt, f, g, 1.0, 0.01);
  CHECK_FALSE(p.a0.has_value());
  CHECK(p.a1(LatticePoint{-3}) == -3.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    RealPoint x = g.node(i);
    if (x[0] > kPi) x[0] -= kTwoPi;
    CHECK(std::abs(p.initial[i] - gauss(0.0)(x)) < 1e-14);
  }
  // periodised data carries the Euclidean transform at integers
  const auto fh = forward_transform(p.initial, FrequencyWindow(1, 8, true));
  for (int k = -8; k <= 8; ++k) {
    const auto e = euclidean_ft([&](const RealPoint& x) { return gauss(0.0)(x); }, RealBox{{-kPi}, {kPi}}, RealPoint{1.0 * k});
    CHECK(std::abs(fh.at(LatticePoint{k}) - e.value) < 1e-12);
  }

  CompactSymbol a0{1, [](const RealPoint& x, const RealPoint&) { return Complex(1.0 + std::cos(x[0])); }, RealBox{{-kPi}, {kPi}}, {}};
  auto pa = periodise_problem([](const RealPoint& k) { return std::abs(k[0]); }, a0, f, g, 1.0, 0.01);
  REQUIRE(pa.a0.has_value());
  CHECK(std::abs((*pa.a0)(g.node(5), LatticePoint{2}) - Complex(1.0 + std::cos(g.node(5)[0]))) < 1e-12);

  CompactSymbol wide{1, a0.rule, RealBox{{-4.0}, {4.0}}, {}};
  CHECK_THROWS_AS(periodise_problem([](const RealPoint& k) { return k[0]; }, wide, f, g, 1.0, 0.01), InvalidArgument);
  auto off = CompactFunction::sample(gauss(1.0), RealBox{{-kPi + 1.0 - 8 * h}, {kPi + 1.0 - 8 * h}}, h);
  CHECK_THROWS_AS(periodise_problem([](const RealPoint& k) { return k[0]; }, std::nullopt, off, g, 1.0, 0.01),
                  InvalidArgument);

  // evolving the periodised problem matches periodising the Euclidean evolution
  const double t = 6 * g.spacing();
  auto moved = CompactFunction::sample(gauss(t), RealBox{{-kPi + t}, {kPi + t}}, h);
  p.t_final = t;
  p.dt = 1.0 / 64;
  CHECK(max_diff(solve_perturbed(p).snapshots.back(), periodise_function(moved, g)) < 1e-12);
}

TEST_CASE("schedules and csv") {
  auto u = uniform_schedule(1.0, 4);
  CHECK(u == std::vector<double>{0.25, 0.5, 0.75});
  auto geo = geometric_schedule(0.01, 1.0, 3);
  REQUIRE(geo.size() == 2);
  CHECK(geo[0] == doctest::Approx(0.01));
  CHECK(geo[1] == doctest::Approx(0.1));
  CHECK_THROWS_AS(geometric_schedule(0.0, 1.0, 3), InvalidArgument);

  auto p = perturbed_preset();
  p.snapshot_times = {0.5};
  const auto trace = solve_perturbed(p);
  std::ostringstream a, b, n;
  write_trace_csv(trace, a);
  write_trace_csv(solve_perturbed(p), b);
  write_norms_csv(trace, n);
  const std::string rows = a.str(), norms = n.str();
  CHECK(rows == b.str());
  CHECK(rows.rfind("t,index,re,im\n0,0,", 0) == 0);
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 1 + 3 * 32);
  CHECK(std::count(norms.begin(), norms.end(), '\n') == 4);
}
