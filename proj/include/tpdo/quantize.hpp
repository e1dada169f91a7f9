#pragma once

// Quantization of toroidal symbols and amplitudes into operators on grid
// functions, symbol extraction, the amplitude -> symbol reduction, dense
// operator matrices on frequency windows, and norm estimates.

#include <cstdint>
#include <vector>

#include "tpdo/symbols.hpp"
#include "tpdo/torus_grid.hpp"

namespace tpdo {

using LinearOperator = std::function<GridFunction(const GridFunction&)>;

/// (Af)(x) = sum_{xi in window} sigma(x, xi) f^(xi) e^{i x.xi} at every node.
GridFunction apply_symbol_op(const ToroidalSymbol& sigma, const GridFunction& f, const FrequencyWindow& window);

/// sigma_A(x, xi) = e^{-i x.xi} (A e_xi)(x) on grid x window, as a table.
ToroidalSymbol symbol_of_operator(const LinearOperator& op, const TorusGrid& grid, const FrequencyWindow& window);

/// (Op(a) f)(x) = sum_xi e^{i x.xi} N^{-n} sum_y e^{-i y.xi} a(x, y, xi) f(y).
GridFunction apply_amplitude_op(const TorusAmplitude& a, const GridFunction& f, const FrequencyWindow& window);

/// a_alpha(x, y, xi) = prod_j (e^{i(y_j - x_j)} - 1)^{alpha_j} a(x, y, xi).
TorusAmplitude build_a_alpha(const TorusAmplitude& a, const MultiIndex& alpha);

/// Delta_xi^alpha a(x, y, xi), evaluated pointwise (a is called on xi + beta).
TorusAmplitude difference_in_xi(const TorusAmplitude& a, const MultiIndex& alpha);

/// sigma_M(x, xi) = sum_{|alpha|<M} (1/alpha!) Delta_xi^alpha D_y^{(alpha)} a(x, y, xi)|_{y=x},
/// with D_y^{(alpha)} = prod_j prod_{l<alpha_j} (D_{y_j} - l), D = -i d. The
/// y-derivatives act on the y-samples of a on `grid`, so a(x, ., xi) should
/// be resolved there. The result can be evaluated at any real x and needs a
/// on xi + beta for |beta| < M.
ToroidalSymbol amplitude_to_symbol(const TorusAmplitude& a, int order, const TorusGrid& grid);

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// M(omega, xi) for omega in `rows` and xi in `cols`; (A f)^(omega) = sum_xi M f^(xi).
struct OperatorMatrix {
  FrequencyWindow rows;
  FrequencyWindow cols;
  std::vector<Complex> entries;  // row-major: entries[r * cols.size() + c]

  OperatorMatrix() = default;
  OperatorMatrix(FrequencyWindow r, FrequencyWindow c)
      : rows(std::move(r)), cols(std::move(c)), entries(rows.size() * cols.size(), Complex{}) {}

  [[nodiscard]] std::size_t row_count() const { return rows.size(); }
  [[nodiscard]] std::size_t col_count() const { return cols.size(); }
  Complex& operator()(std::size_t r, std::size_t c) { return entries[r * cols.size() + c]; }
  [[nodiscard]] Complex operator()(std::size_t r, std::size_t c) const { return entries[r * cols.size() + c]; }

  [[nodiscard]] SpectralFunction apply(const SpectralFunction& f) const;
  [[nodiscard]] std::vector<Complex> apply(const std::vector<Complex>& v) const;
  [[nodiscard]] std::vector<Complex> apply_adjoint(const std::vector<Complex>& v) const;
};

/// Product A * B; requires A.cols == B.rows.
OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);

/// Largest entrywise modulus of A - B (same windows).
double max_abs_difference(const OperatorMatrix& a, const OperatorMatrix& b);

/// Columns are the transforms of A e_xi, restricted to `rows`.
OperatorMatrix operator_matrix(const LinearOperator& op, const TorusGrid& grid, const FrequencyWindow& cols,
                               const FrequencyWindow& rows);
inline OperatorMatrix operator_matrix(const LinearOperator& op, const TorusGrid& grid, const FrequencyWindow& cols) {
  return operator_matrix(op, grid, cols, FrequencyWindow::full(grid));
}

/// M(omega, xi) = (sigma(., xi))^_T(omega - xi) with the grid transform, the
/// difference wrapped onto the grid. Rows default to every resolvable bin.
OperatorMatrix operator_matrix(const ToroidalSymbol& sigma, const TorusGrid& grid, const FrequencyWindow& cols,
                               const FrequencyWindow& rows);
inline OperatorMatrix operator_matrix(const ToroidalSymbol& sigma, const TorusGrid& grid, const FrequencyWindow& cols) {
  return operator_matrix(sigma, grid, cols, FrequencyWindow::full(grid));
}

OperatorMatrix operator_matrix(const TorusAmplitude& a, const TorusGrid& grid, const FrequencyWindow& cols,
                               const FrequencyWindow& rows);
inline OperatorMatrix operator_matrix(const TorusAmplitude& a, const TorusGrid& grid, const FrequencyWindow& cols) {
  return operator_matrix(a, grid, cols, FrequencyWindow::full(grid));
}

/// Schur test (sup_omega sum_xi |M|)^{1/2} (sup_xi sum_omega |M|)^{1/2} >= ||M||.
double l2_bound_estimate(const OperatorMatrix& m);
double l2_bound_estimate(const ToroidalSymbol& sigma, const TorusGrid& grid, const FrequencyWindow& window);

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct PowerIterationOptions {
  double tolerance = 1e-8;
  int max_iterations = 10000;
  std::uint64_t seed = 0x5eed;
};

/// Largest singular value by power iteration on M^H M from a seeded random
/// start; stops when ||M^H M v - s^2 v|| <= tolerance * s^2.
NormEstimate operator_norm(const OperatorMatrix& m, const PowerIterationOptions& options = {});

struct BoundReport {
  double bound = 0.0;
  double empirical_norm = 0.0;
  bool converged = false;
  int window = 0;
};

BoundReport l2_bound_report(const ToroidalSymbol& sigma, const TorusGrid& grid, const FrequencyWindow& window,
                            const PowerIterationOptions& options = {});

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

/// K(x_i, y_j) = sum_{xi in window} sigma(x_i, xi) e^{i (x_i - y_j).xi}.
struct KernelMatrix {
  TorusGrid grid;
  std::vector<Complex> values;  // values[i * grid.size() + j]

  [[nodiscard]] Complex at(std::size_t i, std::size_t j) const { return values[i * grid.size() + j]; }
  /// N^{-n} sum_j K(x, y_j) f(y_j).
  [[nodiscard]] GridFunction apply(const GridFunction& f) const;
};

KernelMatrix kernel_from_symbol(const ToroidalSymbol& sigma, const TorusGrid& grid, const FrequencyWindow& window);

}  // namespace tpdo
