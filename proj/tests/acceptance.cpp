// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "oracles.hpp"
#include "tpdo/cli.hpp"
#include "tpdo/diffcalc.hpp"
#include "tpdo/fso.hpp"
#include "tpdo/hyperbolic.hpp"
#include "tpdo/periodise.hpp"
#include "tpdo/quantize.hpp"
#include "tpdo/symbols.hpp"

using namespace tpdo;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Collects named sub-checks; the criterion passes when all of them do.
class Checks {
 public:
  void operator()(bool ok, const std::string& what) {
    pass_ = pass_ && ok;
    if (!detail_.empty()) detail_ += "; ";
    detail_ += (ok ? "" : "FAILED ") + what;
  }
  Outcome outcome() const { return {pass_, detail_}; }

 private:
  bool pass_ = true;
  std::string detail_;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tpdo_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double max_diff(const GridFunction& a, const GridFunction& b) { return (a - b).max_abs(); }

GridFunction band_limited(const TorusGrid& grid, int cutoff, std::uint64_t seed) {
  auto gen = oracle::rng(seed);
  SpectralFunction s(FrequencyWindow(grid.dim(), cutoff, true));
  for (auto& c : s.coeffs()) c = oracle::random_complex(gen);
  return inverse_transform(s, grid);
}

double bump(double x, double radius) {
  const double t = x / radius;
  return std::abs(t) >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - t * t));
}

// ---------------------------------------------------------------------------

Outcome taylor_suite() {
  Checks check;
  const auto out = scratch("taylor");
  cli::RunOptions opts;
  opts.output = out;
  const auto t0 = std::chrono::steady_clock::now();
  const auto random = cli::run("taylor", {{"preset", "random"}, {"trials", 200}}, opts);
  const auto rs = read_json(out / "taylor_summary.json");
  const auto cubic = cli::run("taylor", {{"preset", "cubic"}, {"trials", 200}}, opts);
  const auto cs = read_json(out / "taylor_summary.json");
  const double elapsed = seconds_since(t0);
  check(random.exit_code == cli::kPass && rs["bound_failures"] == 0,
        "random tables: " + rs["bound_failures"].dump() + "/200 bound failures");
  check(cubic.exit_code == cli::kPass && cs["bound_failures"] == 0 && cs["exact_failures"] == 0 && cs["exact_checks"].get<int>() > 0,
        "cubic: " + cs["exact_checks"].dump() + " exact-zero checks, " + cs["exact_failures"].dump() + " failures");
  check(elapsed < 5.0, "runtime " + fmt(elapsed) + " s");
  return check.outcome();
}

Outcome difference_identities() {
  using namespace diffcalc;
  Checks check;
  // deterministic rational test functions with no special structure
  auto phi = [](const LatticePoint& p) {
    Rational acc(1);
    for (int j = 0; j < p.size(); ++j) acc *= Rational(p[j] * p[j] - 3 * p[j] + 2 + j, 1 + std::abs(p[j]) % 5);
    return acc;
  };
  auto psi = [](const LatticePoint& p) {
    Rational acc(0);
    for (int j = 0; j < p.size(); ++j) acc += Rational(7 - 2 * p[j] * (j + 1), 3 + (p[j] + 20) % 4);
    return acc;
  };

  long leibniz_fail = 0, leibniz_count = 0;
  for (int n = 1; n <= 2; ++n) {
    const ExactLatticeFunction f(n, phi), g(n, psi);
    const ExactLatticeFunction fg(n, [&](const LatticePoint& p) { return phi(p) * psi(p); });
    const auto alphas = indices_of_order_below(n, 5);
    IntBox::cube(n, -8, 8).for_each([&](const LatticePoint& xi) {
      for (const auto& alpha : alphas) {
        Rational rhs = 0;
        for (const auto& beta : indices_below_or_equal(alpha))
          rhs += Rational(static_cast<long long>(binomial(alpha, beta))) * forward_difference(f, beta, xi) *
                 forward_difference(g, alpha - beta, xi + beta.as_point());
        ++leibniz_count;
        if (forward_difference(fg, alpha, xi) != rhs) ++leibniz_fail;
      }
    });
  }
  check(leibniz_fail == 0, "Leibniz " + std::to_string(leibniz_fail) + "/" + std::to_string(leibniz_count));

  // summation by parts with finitely supported factors
  long parts_fail = 0, parts_count = 0;
  for (int n = 1; n <= 2; ++n) {
    const int support = n == 1 ? 8 : 4;
    auto clip = [support](auto rule) {
      return [rule, support](const LatticePoint& p) {
        for (int j = 0; j < p.size(); ++j)
          if (std::abs(p[j]) > support) return Rational(0);
        return rule(p);
      };
    };
    const ExactLatticeFunction f(n, clip(phi)), g(n, clip(psi));
    const IntBox sum_box = IntBox::cube(n, -support - 4, support + 4);
    for (const auto& alpha : indices_of_order_below(n, 5)) {
      Rational lhs = 0, rhs = 0;
      sum_box.for_each([&](const LatticePoint& k) {
        lhs += f(k) * forward_difference(g, alpha, k);
        rhs += transpose_difference(f, alpha, k) * g(k);
      });
      ++parts_count;
      if (lhs != ((alpha.order() % 2) ? Rational(-rhs) : rhs)) ++parts_fail;
    }
  }
  check(parts_fail == 0, "summation by parts " + std::to_string(parts_fail) + "/" + std::to_string(parts_count));

  // Delta^alpha xi^(gamma) = gamma^(alpha) xi^(gamma - alpha), skipping undefined points
  long ff_fail = 0, ff_count = 0;
  for (int n = 1; n <= 2; ++n) {
    const IntBox gammas = n == 1 ? IntBox::cube(1, -4, 6) : IntBox::cube(2, -2, 3);
    const auto alphas = indices_of_order_below(n, 5);
    gammas.for_each([&](const LatticePoint& gamma) {
      const ExactLatticeFunction f(n, [gamma](const LatticePoint& p) { return falling_factorial(p, gamma); });
      IntBox::cube(n, -8, 8).for_each([&](const LatticePoint& xi) {
        for (const auto& alpha : alphas) {
          Rational lhs, rhs;
          try {
            lhs = forward_difference(f, alpha, xi);
            rhs = falling_factorial(gamma, alpha.as_point()) * falling_factorial(xi, gamma - alpha.as_point());
          } catch (const DivisionByZero&) {
            continue;
          }
          ++ff_count;
          if (lhs != rhs) ++ff_fail;
        }
      });
    });
  }
  check(ff_fail == 0 && ff_count > 0, "falling factorial differences " + std::to_string(ff_fail) + "/" + std::to_string(ff_count));

  long nested_fail = 0, nested_count = 0;
  for (int n = 1; n <= 2; ++n) {
    const auto alphas = indices_of_order_below(n, 5);
    IntBox::cube(n, -8, 8).for_each([&](const LatticePoint& theta) {
      for (const auto& alpha : alphas) {
        ++nested_count;
        const Rational expect = falling_factorial(theta, alpha.as_point()) / Rational(static_cast<long long>(alpha.factorial()));
        if (nested_sum(theta, alpha) != expect) ++nested_fail;
      }
    });
  }
  check(nested_fail == 0, "nested sums " + std::to_string(nested_fail) + "/" + std::to_string(nested_count));
  return check.outcome();
}

Outcome theta_checks() {
  Checks check;
  const auto theta = build_theta();
  double at_integers = 0.0;
  for (int xi = -10; xi <= 10; ++xi) {
    const auto q = euclidean_ft([&](const RealPoint& x) { return Complex(theta(x[0])); },
                                RealBox{RealPoint{-kTwoPi}, RealPoint{kTwoPi}}, RealPoint{1.0 * xi}, kTwoPi / 512);
    at_integers = std::max(at_integers, std::abs(q.value - (xi == 0 ? 1.0 : 0.0)));
  }
  check(at_integers < 1e-8, "theta^ at integers " + fmt(at_integers));

  double partition = 0.0;
  for (int s = 0; s <= 4000; ++s) {
    const double x = -kPi + kTwoPi * s / 4000.0;
    double sum = 0.0;
    for (int k = -2; k <= 2; ++k) sum += theta(x + kTwoPi * k);
    partition = std::max(partition, std::abs(sum - 1.0));
  }
  check(partition < 1e-12, "partition of unity " + fmt(partition));

  // d theta^ = (Delta)^t phi_1, against the quadrature transform of -i x theta(x)
  double derivative = 0.0;
  for (double xi = -3.0; xi <= 3.0; xi += 0.25) {
    const auto d = euclidean_ft([&](const RealPoint& x) { return Complex(0.0, -x[0] * theta(x[0])); },
                                RealBox{RealPoint{-kTwoPi}, RealPoint{kTwoPi}}, RealPoint{xi}, kTwoPi / 512);
    derivative = std::max(derivative, std::abs(theta.phi(1, xi) - theta.phi(1, xi - 1.0) - d.value));
  }
  check(derivative < 1e-6, "derivative identity " + fmt(derivative));
  return check.outcome();
}

Outcome extension_checks() {
  Checks check;
  const auto theta = build_theta();
  const std::vector<std::pair<std::string, ToroidalSymbol>> presets = {
      {"1", cli::parse_symbol("const", 1)},
      {"<xi>^-1", cli::parse_symbol("bracket m=-1", 1)},
      {"<xi>", cli::parse_symbol("bracket m=1", 1)},
      {"e^{ix}<xi>^-1", cli::parse_symbol("exp m=-1", 1)}};
  const TorusGrid grid(1, 32);
  for (const auto& [name, sigma] : presets) {
    const auto ext = extend_symbol(sigma, theta, 12);
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); i += 4)
      for (int xi = -16; xi <= 16; ++xi)
        err = std::max(err, std::abs(ext(grid.node(i), RealPoint{1.0 * xi}) - sigma(grid.node(i), LatticePoint{xi})));
    check(err < 1e-8, "restriction " + name + " " + fmt(err));
  }
  const int radius = extension_radius(theta, 1, 1e-8);
  const auto unit = extend_symbol(presets.front().second, theta, radius);
  double partition = 0.0;
  for (double xi : {0.0, 0.3, 0.7}) partition = std::max(partition, std::abs(unit(RealPoint{0.0}, RealPoint{xi}) - 1.0));
  check(partition < 1e-8, "sum theta^(xi - eta) at R = " + std::to_string(radius) + ": " + fmt(partition));
  return check.outcome();
}

Outcome l2_bound() {
  Checks check;
  const auto out = scratch("l2bound");
  cli::RunOptions opts;
  opts.output = out;
  const auto random = cli::run("l2bound", {{"random_trials", 50}, {"n", 1}, {"K", 16}}, opts);
  const auto summary = read_json(out / "l2bound_summary.json");
  check(random.exit_code == cli::kPass && summary["cases"] == 50 && summary["failures"] == 0,
        "random tables " + summary["failures"].dump() + "/50 failures");
  for (const char* m : {"const c=2.5", "bracket m=-1", "bracket m=1"}) {
    const auto r = cli::run("l2bound", {{"symbol", m}, {"K", 16}}, opts);
    check(r.exit_code == cli::kPass, std::string("multiplier ") + m);
  }
  return check.outcome();
}

Outcome periodisation() {
  Checks check;
  const TorusGrid grid(1, 64);
  const double h = kTwoPi / 256;
  auto gaussian = CompactFunction::sample([](const RealPoint& x) { return Complex(std::exp(-x[0] * x[0] / 2)); },
                                          RealBox{RealPoint{-8.0}, RealPoint{8.0}}, h);
  const auto spec = forward_transform(periodise_function(gaussian, grid), FrequencyWindow(1, 4, true));
  double gauss_err = 0.0;
  for (int xi = -4; xi <= 4; ++xi)
    gauss_err = std::max(gauss_err, std::abs(spec.at(LatticePoint{xi}) - std::exp(-0.5 * xi * xi) / std::sqrt(kTwoPi)));
  check(gauss_err < 1e-6, "Gaussian " + fmt(gauss_err));

  const std::vector<std::pair<std::string, EuclideanSymbol>> pairs = {
      {"1", [](const RealPoint&, const RealPoint&) { return Complex(1.0); }},
      {"i xi", [](const RealPoint&, const RealPoint& xi) { return Complex(0.0, xi[0]); }},
      {"2 + cos x", [](const RealPoint& x, const RealPoint&) { return Complex(2.0 + std::cos(x[0])); }}};
  for (const auto& [name, a] : pairs) {
    const auto r = verify_p1(a, gaussian, grid, FrequencyWindow::full(grid));
    check(r.pass && r.discrepancy <= r.budget, "p1 for " + name + ": " + fmt(r.discrepancy) + " <= " + fmt(r.budget));
  }

  auto f = CompactFunction::sample([](const RealPoint& x) { return Complex(std::exp(-x[0] * x[0] / 0.32)); },
                                   RealBox{RealPoint{-kPi}, RealPoint{kPi}}, h);
  EuclideanQuadrature q;
  q.cutoff = 24.0;
  CompactSymbol a0{1, [](const RealPoint& x, const RealPoint& xi) { return Complex(bump(x[0], 2.5) / japanese_bracket(xi)); },
                   RealBox{RealPoint{-2.5}, RealPoint{2.5}}, {}};
  const auto res = smoothing_residual(a0, f, RealBox{RealPoint{-2.5 * kPi}, RealPoint{2.5 * kPi}}, q);
  check(res.inside_max < 1e-8, "smoothing residual on [-pi, pi] " + fmt(res.inside_max));
  return check.outcome();
}

Outcome amplitude_reduction() {
  Checks check;
  double worst = 0.0;
  {
    TorusGrid g(1, 32);
    FrequencyWindow w(1, 8);
    const auto f = band_limited(g, 2, 3);
    TorusAmplitude a(1, [](const RealPoint& x, const RealPoint& y, const LatticePoint& xi) {
      return (Complex(2.0, 0.0) + std::polar(1.0, y[0]) * std::cos(x[0])) / japanese_bracket(xi);
    });
    for (const auto& alpha : indices_of_order_below(1, 3))
      worst = std::max(worst, max_diff(apply_amplitude_op(build_a_alpha(a, alpha), f, w),
                                       apply_amplitude_op(difference_in_xi(a, alpha), f, w)));
  }
  {
    TorusGrid g(2, 10);
    FrequencyWindow w(2, 5);
    const auto f = band_limited(g, 1, 4);
    TorusAmplitude a(2, [](const RealPoint& x, const RealPoint& y, const LatticePoint& xi) {
      return (Complex(1.0, 0.5) + std::polar(1.0, -y[1]) * std::sin(x[0])) / japanese_bracket(xi);
    });
    for (const auto& alpha : indices_of_order_below(2, 3))
      worst = std::max(worst, max_diff(apply_amplitude_op(build_a_alpha(a, alpha), f, w),
                                       apply_amplitude_op(difference_in_xi(a, alpha), f, w)));
  }
  check(worst < 1e-10, "Op(a_alpha) - Op(Delta^alpha a) " + fmt(worst));

  TorusGrid g(1, 64);
  FrequencyWindow w(1, 24);
  const std::vector<TorusAmplitude> suite = {
      TorusAmplitude(1, [](const RealPoint&, const RealPoint& y, const LatticePoint& xi) {
        return std::polar(1.0, -y[0]) / japanese_bracket(xi);
      }),
      TorusAmplitude(1, [](const RealPoint& x, const RealPoint& y, const LatticePoint& xi) {
        return std::polar(1.0, x[0] - y[0]) / std::pow(japanese_bracket(xi), 2);
      }),
      TorusAmplitude(1, [](const RealPoint&, const RealPoint& y, const LatticePoint& xi) {
        return (std::polar(1.0, -y[0]) + 0.5 * std::polar(1.0, -2 * y[0])) / japanese_bracket(xi);
      })};
  for (std::size_t s = 0; s < suite.size(); ++s) {
    const auto exact = operator_matrix(suite[s], g, w);
    std::vector<double> outer;
    for (int m = 1; m <= 3; ++m) {
      const auto approx = operator_matrix(amplitude_to_symbol(suite[s], m, g), g, w);
      double d = 0.0;
      for (std::size_t c = 0; c < w.size(); ++c) {
        if (3 * std::abs(w.frequency(c)[0]) < 2 * w.cutoff()) continue;
        for (std::size_t r = 0; r < exact.row_count(); ++r) d = std::max(d, std::abs(exact(r, c) - approx(r, c)));
      }
      outer.push_back(d);
    }
    check(outer[1] < outer[0] && outer[2] < outer[1],
          "amplitude " + std::to_string(s + 1) + ": " + fmt(outer[0]) + ", " + fmt(outer[1]) + ", " + fmt(outer[2]));
  }
  return check.outcome();
}

double outer_table_gap(const AmplitudeTable& a, const AmplitudeTable& b) {
  double d = 0.0;
  const int k = a.window.cutoff();
  for (std::size_t i = 0; i < a.grid.size(); ++i)
    for (std::size_t z = 0; z < a.grid.size(); ++z)
      for (std::size_t w = 0; w < a.window.size(); ++w) {
        if (3 * std::abs(a.window.frequency(w)[0]) < 2 * k) continue;
        d = std::max(d, std::abs(a.at(i, z, w) - b.at(i, z, w)));
      }
  return d;
}

double outer_column_gap(const OperatorMatrix& a, const OperatorMatrix& b) {
  double d = 0.0;
  const int k = a.cols.cutoff();
  for (std::size_t c = 0; c < a.col_count(); ++c) {
    if (3 * std::abs(a.cols.frequency(c)[0]) < 2 * k) continue;
    for (std::size_t r = 0; r < a.row_count(); ++r) d = std::max(d, std::abs(a(r, c) - b(r, c)));
  }
  return d;
}

std::string series(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + fmt(x);
  return s;
}

Outcome fso_compositions() {
  Checks check;
  {
    TorusGrid g(1, 16);
    const auto full = FrequencyWindow::full(g);
    auto gen = oracle::rng(17);
    SymbolTable pt{g, full, std::vector<Complex>(g.size() * full.size())};
    for (auto& v : pt.values) v = oracle::random_complex(gen);
    const auto p = ToroidalSymbol::from_table(pt);
    std::vector<Complex> coef(4);
    for (auto& v : coef) v = oracle::random_complex(gen);
    TorusAmplitude a(1, [coef](const RealPoint& x, const RealPoint& y, const LatticePoint& xi) {
      return coef[0] + coef[1] * std::polar(1.0, y[0] - x[0]) + coef[2] * std::polar(1.0, -2 * y[0]) +
             coef[3] * static_cast<double>(xi[0]);
    });
    PhaseFunction phi(1, [](const RealPoint& x, const LatticePoint& xi) { return 0.3 * std::sin(x[0]) * japanese_bracket(xi); });
    const auto tp = compose_tp_direct(a, p, g, full, full);
    const double gap = max_abs_difference(fso_matrix(phi, a, g, full, full) * operator_matrix(p, g, full),
                                          fso_matrix(phi, tabulated_amplitude(tp), g, full, full));
    check(gap < 1e-8, "TP matrix identity " + fmt(gap));
  }
  {
    TorusGrid g(1, 32);
    FrequencyWindow w(1, 12);
    TorusAmplitude a(1, [](const RealPoint& x, const RealPoint& y, const LatticePoint&) {
      return Complex(1.0) + 0.5 * std::polar(1.0, y[0]) * std::cos(x[0]);
    });
    ToroidalSymbol p(1, [](const RealPoint& y, const LatticePoint& e) {
      return Complex(2 + std::sin(y[0]), 0.3 * std::cos(2 * y[0])) / japanese_bracket(e);
    });
    const auto direct = compose_tp_direct(a, p, g, w, FrequencyWindow::full(g));
    std::vector<double> gaps;
    for (int m = 1; m <= 3; ++m) gaps.push_back(outer_table_gap(direct, tabulate_amplitude(compose_tp_asymptotic(a, p, m, g), g, w)));
    check(gaps[1] < gaps[0] && gaps[2] < gaps[1], "TP by M: " + series(gaps));
  }
  {
    TorusGrid g(1, 64);
    FrequencyWindow w(1, 12);
    PhaseFunction phi(
        1, [](const RealPoint& x, const LatticePoint& xi) { return 0.25 * std::sin(x[0]) * japanese_bracket(xi); }, {},
        [](const RealPoint& x, const LatticePoint& xi) { return RealPoint{0.25 * std::cos(x[0]) * japanese_bracket(xi)}; });
    TorusAmplitude a(1, [](const RealPoint& x, const RealPoint&, const LatticePoint&) { return Complex(1.0 + 0.3 * std::cos(x[0])); });
    ToroidalSymbol p(1, [](const RealPoint& x, const LatticePoint& e) { return Complex(1.0 + 0.5 * std::cos(x[0])) / japanese_bracket(e); });
    const auto PT = operator_matrix(p, g, FrequencyWindow::full(g)) * fso_matrix(phi, a, g, w, w);
    std::vector<double> gaps;
    double lead = 0.0;
    for (int m = 1; m <= 3; ++m) {
      const auto em = compose_pt_asymptotic(p, phi, a, m, g, w);
      gaps.push_back(outer_column_gap(fso_matrix(phi, tabulated_amplitude(em.table), g, w, w), PT));
      if (m != 1) continue;
      const auto ext = extend_symbol(p, ThetaFunction(), em.radius);
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t z = 0; z < g.size(); z += 7)
          for (std::size_t k = 0; k < w.size(); ++k) {
            const LatticePoint xi = w.frequency(k);
            lead = std::max(lead, std::abs(em.table.at(i, z, k) -
                                           ext(g.node(i), phi.gradient(g.node(i), xi)) * a(g.node(i), g.node(z), xi)));
          }
    }
    check(gaps[1] < gaps[0] && gaps[2] < gaps[1], "PT by M: " + series(gaps));
    check(lead < 1e-12, "PT leading term " + fmt(lead));
  }
  return check.outcome();
}

Outcome hyperbolic_solver() {
  Checks check;
  const auto t0 = std::chrono::steady_clock::now();
  const LatticeMultiplier transport = [](const LatticePoint& k) { return static_cast<double>(k[0]); };
  const LatticeMultiplier modulus = [](const LatticePoint& k) {
    double s = 0.0;
    for (int j = 0; j < k.size(); ++j) s += static_cast<double>(k[j]) * k[j];
    return std::sqrt(s);
  };

  TorusGrid g(1, 64);
  HyperbolicProblem p;
  p.a1 = transport;
  p.initial = band_limited(g, 30, 6);
  p.t_final = 5 * g.spacing();
  p.dt = 1.0 / 128;
  const auto u = solve_perturbed(p).snapshots.back();
  double shift = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) shift = std::max(shift, std::abs(u[i] - p.initial[(i + 59) % 64]));
  check(shift < 1e-10, "transport " + fmt(shift));

  double drift = 0.0;
  for (const auto& [grid, a1] : {std::pair{TorusGrid(1, 64), transport}, std::pair{TorusGrid(1, 64), modulus},
                                 std::pair{TorusGrid(2, 16), modulus}}) {
    HyperbolicProblem q;
    q.a1 = a1;
    q.initial = band_limited(grid, grid.dim() == 1 ? 24 : 6, 8);
    q.t_final = 10.0;
    q.dt = 0.5 / multiplier_bound(a1, grid);
    q.snapshot_times = uniform_schedule(10.0, 10);
    for (double e : solve_perturbed(q).norms) drift = std::max(drift, std::abs(e - l2_norm(q.initial)));
  }
  check(drift < 1e-12, "L2 drift " + fmt(drift));

  HyperbolicProblem r;
  r.a1 = transport;
  r.a0 = ToroidalSymbol(1, [](const RealPoint& x, const LatticePoint& xi) {
    return Complex(0.3 * (1.0 + std::cos(x[0])), 0.0) + Complex(0.2 * std::sin(x[0]), 0.0) / japanese_bracket(xi);
  });
  r.initial = band_limited(TorusGrid(1, 32), 6, 31);
  r.t_final = 1.0;
  r.dt = 1.0 / 40;
  const auto study = self_convergence(r, 3);
  double order = 1e300;
  for (double q : study.orders) order = std::min(order, q);
  check(!study.exact && order >= 1.9, "splitting order " + fmt(order));

  const double elapsed = seconds_since(t0);
  check(elapsed < 30.0, "runtime " + fmt(elapsed) + " s");
  return check.outcome();
}

Outcome determinism() {
  Checks check;
  const fs::path exe = TPDO_EXECUTABLE, configs = TPDO_CONFIG_DIR;
  for (const char* name : {"taylor", "l2bound_random", "solve_perturbed"}) {
    std::string command = name;
    command = command.substr(0, command.find('_'));
    std::vector<fs::path> dirs;
    for (const char* run : {"a", "b"}) {
      dirs.push_back(scratch(std::string("det_") + name + "_" + run));
      const std::string line = "\"" + exe.string() + "\" " + command + " --config \"" + (configs / (std::string(name) + ".json")).string() +
                               "\" --seed 7 --output \"" + dirs.back().string() + "\" > /dev/null";
      const int status = std::system(line.c_str());
      check(status == 0, std::string(name) + " run " + run + " exit " + std::to_string(status));
    }
    int files = 0, differing = 0;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      ++files;
      if (slurp(entry.path()) != slurp(dirs[1] / entry.path().filename())) ++differing;
    }
    check(files > 0 && differing == 0, std::string(name) + ": " + std::to_string(differing) + "/" + std::to_string(files) + " files differ");
  }
  return check.outcome();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"discrete Taylor suite", taylor_suite},
      {"difference-calculus identities", difference_identities},
      {"theta cutoff and transform", theta_checks},
      {"symbol extension", extension_checks},
      {"L2 bound", l2_bound},
      {"periodisation", periodisation},
      {"amplitude reduction", amplitude_reduction},
      {"FSO compositions", fso_compositions},
      {"hyperbolic solver", hyperbolic_solver},
      {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << ", "
              << fmt(seconds_since(t0)) << " s): " << o.detail << std::endl;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
