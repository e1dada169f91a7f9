#pragma once

// Compactly supported functions on R^n, periodisation onto the torus, the
// Euclidean quantization a(X,D) by frequency quadrature, and numerical checks
// of how periodisation intertwines Euclidean and toroidal operators.

#include <vector>

#include "tpdo/symbols.hpp"
#include "tpdo/torus_grid.hpp"

namespace tpdo {

/// Smallest box with corners on multiples of h that contains [lo, hi].
RealBox aligned_box(const RealBox& box, double h);

/// Samples u(lo + m h) over a support box, row-major (first axis slowest).
class CompactFunction {
 public:
  CompactFunction() = default;
  /// Every side of the box must be a multiple of h. With `check_boundary` the
  /// samples on the boundary must vanish to 1e-12.
  CompactFunction(RealBox box, double h, std::vector<Complex> values, bool check_boundary = true);

  /// Samples f on aligned_box(box, h).
  template <class F>
  static CompactFunction sample(F&& f, const RealBox& box, double h, bool check_boundary = true) {
    const RealBox b = aligned_box(box, h);
    CompactFunction shape(b, h);
    std::vector<Complex> v(shape.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(shape.node(i));
    return {b, h, std::move(v), check_boundary};
  }

  [[nodiscard]] int dim() const { return box_.dim(); }
  [[nodiscard]] const RealBox& box() const { return box_; }
  [[nodiscard]] double spacing() const { return h_; }
  [[nodiscard]] int count(int axis) const { return counts_[axis]; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] const std::vector<Complex>& values() const { return values_; }
  Complex& operator[](std::size_t i) { return values_[i]; }
  const Complex& operator[](std::size_t i) const { return values_[i]; }

  [[nodiscard]] LatticePoint sample_index(std::size_t linear) const;
  [[nodiscard]] RealPoint node(std::size_t linear) const;

  /// Tensor quintic (6-point Lagrange) interpolation; zero outside the box.
  Complex operator()(const RealPoint& x) const;

  /// h^n sum |u|, the trapezoid value of the L1 norm.
  [[nodiscard]] double l1_norm() const;
  [[nodiscard]] double max_abs() const;
  /// Largest |u| over the samples on the box boundary.
  [[nodiscard]] double boundary_max() const;

 private:
  CompactFunction(const RealBox& box, double h);  // shape only

  RealBox box_;
  double h_ = 0.0;
  LatticePoint counts_;
  std::vector<Complex> values_;
};

/// (2pi)^{-n} int u(x) e^{-i x.xi} dx by the trapezoid sum over the samples.
Complex euclidean_transform(const CompactFunction& u, const RealPoint& xi);

struct PeriodiseOptions {
  /// Allow quintic interpolation when the torus nodes are not sample points.
  bool interpolate = false;
};

/// pu(x) = sum_{k in Z^n} u(x + 2 pi k) at the torus nodes. Without
/// interpolation, 2pi/N must be a multiple of h and the box corners multiples
/// of h; otherwise Mismatch is thrown.
GridFunction periodise_function(const CompactFunction& u, const TorusGrid& grid, const PeriodiseOptions& options = {});

/// (2pi/N)^n sum_j |f(x_j)|, the trapezoid L1 norm over one period.
double l1_norm_torus(const GridFunction& f);

/// a(x, xi) on R^n x R^n.
using EuclideanSymbol = std::function<Complex(const RealPoint&, const RealPoint&)>;

/// A Euclidean symbol with x-support inside `support` for every xi.
struct CompactSymbol {
  int dim = 0;
  EuclideanSymbol rule;
  RealBox support;
  SymbolOrder order;
};

/// sum_k a(x + 2 pi k, xi) over the finitely many k that reach the support.
Complex lattice_sum(const CompactSymbol& a, const RealPoint& x, const RealPoint& xi);

/// The periodic Euclidean symbol pa.
EuclideanSymbol periodised_symbol(const CompactSymbol& a);

/// (pa)(x, xi) for integer xi in `window`; other frequencies throw OutOfDomain.
ToroidalSymbol periodise_symbol(const CompactSymbol& a, const FrequencyWindow& window);

/// a(x, xi) for x in T^n, xi in Z^n; a must be 2pi-periodic in x.
ToroidalSymbol restrict_symbol(const EuclideanSymbol& a, int dim, SymbolOrder order = {});

/// b = restriction(a1) + periodise_symbol(a0).
ToroidalSymbol split_and_periodise(const EuclideanSymbol& a1, const CompactSymbol& a0, const FrequencyWindow& window);

// ---------------------------------------------------------------------------
// Euclidean quantization
// ---------------------------------------------------------------------------

struct EuclideanQuadrature {
  /// Frequencies are truncated to [-cutoff, cutoff]^n.
  double cutoff = 12.0;
  /// Trapezoid step in xi. The result is implicitly 2pi/step periodic in x,
  /// so 2pi/step should exceed the spread of input plus output boxes.
  double step = 0.1;
};

struct EuclideanResult {
  CompactFunction value;  // boundary not required to vanish
  /// Max over the output of |T(step) - T(2 step)| + |outer-shell contribution|.
  double error_indicator = 0.0;
  bool flagged = false;
};

/// a(X,D)f(x) = int e^{i x.xi} a(x, xi) f^_E(xi) dxi on the samples of
/// aligned_box(output, f.spacing()), by the trapezoid rule over the truncated
/// frequency cube. The indicator compares against the rule at twice the step
/// and adds the contribution of |xi|_inf > 3/4 cutoff as a truncation proxy;
/// `flagged` is set when it exceeds `tolerance`.
EuclideanResult apply_euclidean_op(const EuclideanSymbol& a, const CompactFunction& f, const RealBox& output,
                                   const EuclideanQuadrature& quadrature = {}, double tolerance = 1e-6);

// ---------------------------------------------------------------------------
// Commutation checks
// ---------------------------------------------------------------------------

struct CommutationOptions {
  EuclideanQuadrature quadrature;
  /// The output box is the support of f grown by this much on every side.
  double margin = kPi;
};

struct CommutationReport {
  double discrepancy = 0.0;
  double budget = 0.0;
  double quadrature_part = 0.0;
  double truncation_part = 0.0;
  bool pass = false;
};

/// Compares p(a(X,D) f) with a~(X,D)(p f) on the torus grid, a~ the restriction
/// of the periodic symbol a, applied on `window`. The budget sums the
/// quadrature indicator and the truncation terms (output box edge, torus
/// window edge) over the periodic images, plus a round-off floor.
CommutationReport verify_p1(const EuclideanSymbol& a, const CompactFunction& f, const TorusGrid& grid,
                            const FrequencyWindow& window, const CommutationOptions& options = {});

struct ResidualReport {
  CompactFunction residual;
  /// max |Rf| over samples in [-pi, pi]^n.
  double inside_max = 0.0;
  double max_abs = 0.0;
  /// Sum of the quadrature indicators of both terms.
  double error_indicator = 0.0;
  /// max |Rf| over samples with |x|_inf >= 2pi.
  double beyond_two_pi = 0.0;
};

/// Rf = a0(X,D) f - (p a0)(X,D) f, both terms computed by quadrature on
/// `output`. Requires the x-support of a0 and the support of f inside
/// [-pi, pi]^n.
ResidualReport smoothing_residual(const CompactSymbol& a0, const CompactFunction& f, const RealBox& output,
                                  const EuclideanQuadrature& quadrature = {});

struct SplitReport {
  /// ||p(a f) - b~(p f)||_inf with a = a1 + a0.
  double discrepancy = 0.0;
  /// ||p(R f)||_inf.
  double residual = 0.0;
  /// ||p(a f) - b~(p f) - p(R f)||_inf, to be compared with the budget.
  double corrected = 0.0;
  double budget = 0.0;
  bool pass = false;
};

SplitReport verify_split(const EuclideanSymbol& a1, const CompactSymbol& a0, const CompactFunction& f,
                         const TorusGrid& grid, const FrequencyWindow& window, const CommutationOptions& options = {});

/// A compactly supported u with p u = g: u = theta g on [-2pi, 2pi]^n, where
/// theta is the partition-of-unity cutoff and g is evaluated by trigonometric
/// interpolation. Sample spacing is 2pi / (N * refine).
CompactFunction compact_lift(const GridFunction& g, int refine = 1, const ThetaFunction& theta = ThetaFunction());

}  // namespace tpdo
