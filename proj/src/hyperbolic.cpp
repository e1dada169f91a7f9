#include "tpdo/hyperbolic.hpp"

#include <cmath>
#include <ostream>

#include "tpdo/quantize.hpp"

namespace tpdo {

namespace {

// a1 at every FFT bin of the grid, row-major.
std::vector<double> multiplier_on_bins(const LatticeMultiplier& a1, const TorusGrid& grid) {
  std::vector<double> out(grid.size());
  for (std::size_t b = 0; b < grid.size(); ++b) {
    LatticePoint k = grid.node_index(b);
    for (int j = 0; j < grid.dim(); ++j) k[j] = signed_frequency(k[j], grid.points());
    out[b] = a1(k);
    if (!std::isfinite(out[b])) throw InvalidArgument("a1 is not finite on the grid frequencies");
  }
  return out;
}

GridFunction propagate(const std::vector<double>& a1, const GridFunction& f, double t) {
  auto bins = grid_spectrum(f);
  for (std::size_t b = 0; b < bins.size(); ++b) bins[b] *= std::polar(1.0, -t * a1[b]);
  return grid_synthesis(f.grid(), std::move(bins));
}

bool inside_fundamental_domain(const RealBox& box) {
  for (int j = 0; j < box.dim(); ++j)
    if (box.lo[j] < -kPi - 1e-12 || box.hi[j] > kPi + 1e-12) return false;
  return true;
}

void validate(const HyperbolicProblem& p) {
  if (!p.a1) throw InvalidArgument("a1 is required");
  if (p.initial.size() == 0) throw InvalidArgument("initial data is empty");
  if (!(p.dt > 0.0) || !std::isfinite(p.dt)) throw InvalidArgument("dt must be positive");
  if (!(p.t_final >= 0.0) || !std::isfinite(p.t_final)) throw InvalidArgument("t_final must be non-negative");
  if (p.a0 && p.a0->dim() != p.initial.grid().dim()) throw Mismatch("a0 and grid dimensions differ");
  double last = 0.0;
  for (double t : p.snapshot_times) {
    if (!(t > last) || !(t < p.t_final)) throw InvalidArgument("snapshot times must increase strictly inside (0, t_final)");
    last = t;
  }
}

bool finite(const GridFunction& w) {
  for (const auto& v : w.values())
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

}  // namespace

HyperbolicProblem periodise_problem(const EuclideanMultiplier& a1, const std::optional<CompactSymbol>& a0,
                                    const CompactFunction& f, const TorusGrid& grid, double t_final, double dt,
                                    const PeriodiseOptions& options) {
  if (f.dim() != grid.dim()) throw Mismatch("initial data and grid dimensions differ");
  if (!inside_fundamental_domain(f.box())) throw InvalidArgument("supp f must lie in [-pi, pi]^n");
  HyperbolicProblem p;
  p.a1 = [a1](const LatticePoint& k) {
    RealPoint x(k.size());
    for (int j = 0; j < k.size(); ++j) x[j] = k[j];
    return a1(x);
  };
  if (a0) {
    if (a0->dim != grid.dim()) throw Mismatch("a0 and grid dimensions differ");
    if (!inside_fundamental_domain(a0->support)) throw InvalidArgument("supp a0 must lie in [-pi, pi]^n");
    const auto pa = periodise_symbol(*a0, FrequencyWindow::full(grid));
    p.a0 = ToroidalSymbol::from_table(pa.tabulate(grid, FrequencyWindow::full(grid)), a0->order);
  }
  p.initial = periodise_function(f, grid, options);
  p.t_final = t_final;
  p.dt = dt;
  validate(p);
  return p;
}

GridFunction solve_constant(const LatticeMultiplier& a1, const GridFunction& f, double t) {
  return propagate(multiplier_on_bins(a1, f.grid()), f, t);
}

double multiplier_bound(const LatticeMultiplier& a1, const TorusGrid& grid) {
  double m = 0.0;
  for (double v : multiplier_on_bins(a1, grid)) m = std::max(m, std::abs(v));
  return m;
}

EvolutionTrace solve_perturbed(const HyperbolicProblem& problem) {
  validate(problem);
  const TorusGrid& grid = problem.initial.grid();
  const auto a1 = multiplier_on_bins(problem.a1, grid);
  double bound = 0.0;
  for (double v : a1) bound = std::max(bound, std::abs(v));
  if (problem.dt * bound > 0.5) {
    throw InvalidArgument("dt max|a1| = " + format_real(problem.dt * bound) + " exceeds 0.5");
  }

  const auto full = FrequencyWindow::full(grid);
  std::optional<ToroidalSymbol> a0;
  if (problem.a0) a0 = problem.a0->table() ? *problem.a0 : ToroidalSymbol::from_table(problem.a0->tabulate(grid, full));
  auto rhs = [&](const GridFunction& w) { return Complex(0.0, -1.0) * apply_symbol_op(*a0, w, full); };

  std::vector<double> stops = problem.snapshot_times;
  if (problem.t_final > 0.0) stops.push_back(problem.t_final);

  EvolutionTrace trace;
  GridFunction w = problem.initial;
  trace.times.push_back(0.0);
  trace.snapshots.push_back(w);
  trace.norms.push_back(l2_norm(w));

  double t0 = 0.0;
  long step = 0;
  for (double t1 : stops) {
    const long steps = std::max(1L, static_cast<long>(std::ceil((t1 - t0) / problem.dt - 1e-9)));
    const double h = (t1 - t0) / static_cast<double>(steps);
    for (long s = 0; s < steps; ++s, ++step) {
      if (!a0) {
        w = propagate(a1, w, h);
      } else {
        w = propagate(a1, w, h / 2);
        const auto k1 = rhs(w);
        const auto k2 = rhs(w + Complex(h / 2) * k1);
        const auto k3 = rhs(w + Complex(h / 2) * k2);
        const auto k4 = rhs(w + Complex(h) * k3);
        w += Complex(h / 6) * (k1 + Complex(2.0) * k2 + Complex(2.0) * k3 + k4);
        w = propagate(a1, w, h / 2);
      }
      if (!finite(w)) {
        throw Error("solution became non-finite at step " + std::to_string(step + 1) + ", t = " +
                    format_real(t0 + h * static_cast<double>(s + 1)));
      }
    }
    trace.times.push_back(t1);
    trace.snapshots.push_back(w);
    trace.norms.push_back(l2_norm(w));
    t0 = t1;
  }
  return trace;
}

std::vector<double> energy(const EvolutionTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.snapshots.size());
  for (const auto& w : trace.snapshots) out.push_back(l2_norm(w));
  return out;
}

ConvergenceStudy self_convergence(const HyperbolicProblem& problem, int levels) {
  if (levels < 1) throw InvalidArgument("at least one refinement level is needed");
  ConvergenceStudy study;
  std::vector<GridFunction> finals;
  HyperbolicProblem p = problem;
  p.snapshot_times.clear();
  for (int l = 0; l <= levels; ++l) {
    p.dt = problem.dt / std::ldexp(1.0, l);
    study.steps.push_back(p.dt);
    finals.push_back(solve_perturbed(p).snapshots.back());
  }
  double scale = 1.0;
  for (const auto& v : finals.back().values()) scale = std::max(scale, std::abs(v));
  study.exact = true;
  for (int l = 0; l < levels; ++l) {
    study.differences.push_back((finals[l] - finals[l + 1]).max_abs());
    if (study.differences.back() > 1e-11 * scale) study.exact = false;
  }
  for (int l = 0; l + 1 < levels; ++l) study.orders.push_back(std::log2(study.differences[l] / study.differences[l + 1]));
  return study;
}

std::vector<double> uniform_schedule(double t_final, int count) {
  std::vector<double> out;
  for (int i = 1; i < count; ++i) out.push_back(t_final * i / count);
  return out;
}

std::vector<double> geometric_schedule(double t_first, double t_final, int count) {
  if (!(t_first > 0.0) || !(t_first < t_final) || count < 2) throw InvalidArgument("geometric schedule needs 0 < t_first < t_final");
  std::vector<double> out;
  const double ratio = std::pow(t_final / t_first, 1.0 / (count - 1));
  double t = t_first;
  for (int i = 0; i + 1 < count; ++i, t *= ratio) out.push_back(t);
  return out;
}

void write_trace_csv(const EvolutionTrace& trace, std::ostream& out) {
  out << "t,index,re,im\n";
  for (std::size_t s = 0; s < trace.times.size(); ++s) {
    const auto t = format_real(trace.times[s]);
    const auto& w = trace.snapshots[s];
    for (std::size_t i = 0; i < w.size(); ++i)
      out << t << ',' << i << ',' << format_real(w[i].real()) << ',' << format_real(w[i].imag()) << '\n';
  }
}

void write_norms_csv(const EvolutionTrace& trace, std::ostream& out) {
  out << "t,l2norm\n";
  for (std::size_t s = 0; s < trace.times.size(); ++s)
    out << format_real(trace.times[s]) << ',' << format_real(trace.norms[s]) << '\n';
}

}  // namespace tpdo
