#pragma once

// First-order hyperbolic problems on the torus,
//   i d_t w = (a1(D) + a0(X, D)) w,  w(0) = f,
// with a1 a real lattice multiplier (smoothness in xi not required) and a0 a
// toroidal symbol of order <= 0. The multiplier part is propagated exactly;
// a0 enters through Strang splitting with an RK4 inner step.

#include <iosfwd>
#include <optional>
#include <vector>

#include "tpdo/periodise.hpp"
#include "tpdo/symbols.hpp"
#include "tpdo/torus_grid.hpp"

namespace tpdo {

using LatticeMultiplier = std::function<double(const LatticePoint&)>;
using EuclideanMultiplier = std::function<double(const RealPoint&)>;

struct HyperbolicProblem {
  LatticeMultiplier a1;
  std::optional<ToroidalSymbol> a0;
  GridFunction initial;
  double t_final = 0.0;
  double dt = 0.0;
  /// Extra snapshot times in (0, t_final); 0 and t_final are always recorded.
  std::vector<double> snapshot_times;
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<GridFunction> snapshots;
  std::vector<double> norms;
};

/// Torus data for a Euclidean problem: a1 restricted to Z^n, a0 periodised on
/// the full window of `grid`, f periodised. Supports must lie in [-pi, pi]^n.
HyperbolicProblem periodise_problem(const EuclideanMultiplier& a1, const std::optional<CompactSymbol>& a0,
                                    const CompactFunction& f, const TorusGrid& grid, double t_final, double dt,
                                    const PeriodiseOptions& options = {});

/// w^(k, t) = e^{-i t a1(k)} f^(k) on every resolvable bin.
GridFunction solve_constant(const LatticeMultiplier& a1, const GridFunction& f, double t);

/// max |a1(k)| over the resolvable bins of the grid.
double multiplier_bound(const LatticeMultiplier& a1, const TorusGrid& grid);

/// Throws InvalidArgument when dt max|a1| > 0.5 or the problem is malformed,
/// and Error when the solution stops being finite. Each snapshot interval is
/// covered by equal steps no longer than dt.
EvolutionTrace solve_perturbed(const HyperbolicProblem& problem);

/// L2 norm at each recorded time.
std::vector<double> energy(const EvolutionTrace& trace);

struct ConvergenceStudy {
  std::vector<double> steps;
  /// max |w_dt - w_{dt/2}| at t_final, one per step except the last.
  std::vector<double> differences;
  /// log2 of consecutive difference ratios.
  std::vector<double> orders;
  /// Every difference is at round-off level; orders carry no information.
  bool exact = false;
};

/// Runs the problem at dt, dt/2, ..., dt/2^levels.
ConvergenceStudy self_convergence(const HyperbolicProblem& problem, int levels = 3);

std::vector<double> uniform_schedule(double t_final, int count);
std::vector<double> geometric_schedule(double t_first, double t_final, int count);

/// Rows "t,index,re,im".
void write_trace_csv(const EvolutionTrace& trace, std::ostream& out);
/// Rows "t,l2norm".
void write_norms_csv(const EvolutionTrace& trace, std::ostream& out);

}  // namespace tpdo
