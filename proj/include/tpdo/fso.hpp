#pragma once

// Fourier series operators
//   Tu(x) = sum_xi e^{i phi(x, xi)} N^{-n} sum_y e^{-i y.xi} a(x, y, xi) u(y),
// their L2 conditions, and composition with toroidal pseudodifferential
// operators in both orders (direct and asymptotic).

#include <memory>
#include <vector>

#include "tpdo/quantize.hpp"
#include "tpdo/symbols.hpp"

namespace tpdo {

/// phi(x, xi) = x . L(xi) + psi(x, xi) with psi 2pi-periodic in x and real.
/// x-derivatives of psi are analytic when a gradient rule is supplied and
/// otherwise spectral on an internal resolution grid.
class PhaseFunction {
 public:
  using Linear = std::function<RealPoint(const LatticePoint&)>;
  using Periodic = std::function<double(const RealPoint&, const LatticePoint&)>;
  using Gradient = std::function<RealPoint(const RealPoint&, const LatticePoint&)>;

  PhaseFunction() = default;
  /// Empty `periodic` means psi = 0, empty `linear` means L(xi) = xi.
  /// `resolution` is the per-axis point count of the spectral grid (0 picks
  /// 64, 32, 16 for n = 1, 2, 3).
  explicit PhaseFunction(int dim, Periodic periodic = {}, Linear linear = {}, Gradient periodic_gradient = {},
                         int resolution = 0);

  /// x . xi
  static PhaseFunction standard(int dim);
  /// x . xi + tau . xi, a translation by tau.
  static PhaseFunction shifted(const RealPoint& tau);

  [[nodiscard]] int dim() const { return dim_; }
  double operator()(const RealPoint& x, const LatticePoint& xi) const;
  [[nodiscard]] RealPoint linear(const LatticePoint& xi) const;
  [[nodiscard]] double periodic(const RealPoint& x, const LatticePoint& xi) const;
  [[nodiscard]] bool has_analytic_gradient() const { return static_cast<bool>(periodic_gradient_); }

  /// grad_x phi = L(xi) + grad_x psi.
  [[nodiscard]] RealPoint gradient(const RealPoint& x, const LatticePoint& xi) const;
  /// The same with grad_x psi taken spectrally even when a rule exists.
  [[nodiscard]] RealPoint spectral_gradient(const RealPoint& x, const LatticePoint& xi) const;

  /// d_x^beta psi(x, xi) for each beta, spectral.
  [[nodiscard]] std::vector<double> periodic_jet(const RealPoint& x, const LatticePoint& xi,
                                                 const std::vector<MultiIndex>& betas) const;

  /// Delta_xi^beta phi(x, xi).
  [[nodiscard]] double difference(const RealPoint& x, const LatticePoint& xi, const MultiIndex& beta) const;

  [[nodiscard]] const TorusGrid& resolution_grid() const { return grid_; }

 private:
  const std::vector<Complex>& psi_spectrum(const LatticePoint& xi) const;

  int dim_ = 0;
  Periodic periodic_;
  Linear linear_;
  Gradient periodic_gradient_;
  TorusGrid grid_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

/// Psi(x, y, xi) = phi(y, xi) - phi(x, xi) + (x - y) . grad_x phi(x, xi).
double psi_correction(const PhaseFunction& phi, const RealPoint& x, const RealPoint& y, const LatticePoint& xi);

// ---------------------------------------------------------------------------
// Tabulated amplitudes
// ---------------------------------------------------------------------------

/// c(x_i, z_j, xi) over grid x grid x window: values[(i N^n + j) |W| + k].
struct AmplitudeTable {
  TorusGrid grid;
  FrequencyWindow window;
  std::vector<Complex> values;

  [[nodiscard]] Complex at(std::size_t x, std::size_t z, std::size_t xi) const {
    return values[(x * grid.size() + z) * window.size() + xi];
  }
};

/// Size guard for dense amplitude tables: n = 1, or n = 2 with K <= 8 and N <= 16.
void check_table_size(const TorusGrid& grid, const FrequencyWindow& window);

AmplitudeTable tabulate_amplitude(const TorusAmplitude& a, const TorusGrid& grid, const FrequencyWindow& window);

/// Amplitude backed by a table; arguments off the grid or window throw OutOfDomain.
TorusAmplitude tabulated_amplitude(AmplitudeTable table, SymbolOrder order = {});

// ---------------------------------------------------------------------------
// Application and L2 checks
// ---------------------------------------------------------------------------

GridFunction apply_fso(const PhaseFunction& phi, const TorusAmplitude& a, const GridFunction& u,
                       const FrequencyWindow& window);
/// y-independent amplitude: Tu(x) = sum_xi e^{i phi(x, xi)} a(x, xi) u^(xi).
GridFunction apply_fso(const PhaseFunction& phi, const ToroidalSymbol& a, const GridFunction& u,
                       const FrequencyWindow& window);

struct FsoConditionEntry {
  MultiIndex alpha;
  /// sup |d_x^alpha a(x, k)|.
  double amplitude = 0.0;
  /// sup over j of |d_x^alpha Delta_{k_j} phi(x, k)|.
  double phase_difference = 0.0;
};

struct FsoConditionsReport {
  std::vector<FsoConditionEntry> table;
  /// min over x and k != l of |grad phi(x, k) - grad phi(x, l)| / |k - l|.
  double graph_constant = 0.0;
  /// Pairs with |grad phi(x, k) - grad phi(x, l)| <= 1e-12 |k - l|.
  std::size_t degenerate_pairs = 0;
  /// max |analytic - spectral gradient|, or -1 without an analytic rule.
  double gradient_mismatch = -1.0;
  bool bounded = false;
  bool graph_ok = false;
  bool pass = false;
};

/// Samples the boundedness and graph conditions over grid x window, for
/// |alpha| <= alpha_cap (negative: 2n + 1). x-derivatives are spectral.
FsoConditionsReport check_fso_l2_conditions(const PhaseFunction& phi, const ToroidalSymbol& a, const TorusGrid& grid,
                                            const FrequencyWindow& window, int alpha_cap = -1,
                                            double threshold = 1e6);

/// Matrix of T from `window` to every resolvable bin of the grid.
OperatorMatrix fso_matrix(const PhaseFunction& phi, const TorusAmplitude& a, const TorusGrid& grid,
                          const FrequencyWindow& window, const FrequencyWindow& cols);

/// Empirical norm of T restricted to band-limited inputs on `window`.
NormEstimate fso_norm_probe(const PhaseFunction& phi, const TorusAmplitude& a, const TorusGrid& grid,
                            const FrequencyWindow& window, const PowerIterationOptions& options = {});

// ---------------------------------------------------------------------------
// Compositions
// ---------------------------------------------------------------------------

/// c(x, z, xi) = sum_{eta in eta_window} N^{-n} sum_y e^{i(y - z).(eta - xi)} a(x, y, xi) p(y, eta)
/// for xi in xi_window. The phase plays no part. With T applied on xi_window
/// and P on eta_window, the operator (phi, c) equals T P exactly.
AmplitudeTable compose_tp_direct(const TorusAmplitude& a, const ToroidalSymbol& p, const TorusGrid& grid,
                                 const FrequencyWindow& xi_window, const FrequencyWindow& eta_window);

/// c_M(x, z, xi) = sum_{|alpha| < M} (1/alpha!) (-D_y)^{(alpha)} [a(x, y, xi) Delta_xi^alpha p(y, xi)] at y = z,
/// with (-D)^{(alpha)} = prod_j prod_{l < alpha_j} (-D_{y_j} - l), D = -i d. The
/// y-dependence is resolved spectrally on `grid`.
TorusAmplitude compose_tp_asymptotic(const TorusAmplitude& a, const ToroidalSymbol& p, int order,
                                     const TorusGrid& grid);

struct PtOptions {
  ThetaFunction theta = ThetaFunction();
  /// Extension truncation; 0 picks the smallest radius meeting `tolerance`.
  int radius = 0;
  double tolerance = 1e-8;
  /// Central differences in eta on the extended symbol.
  double step = 1.0 / 16;
  int accuracy = 4;
};

struct PtExpansion {
  AmplitudeTable table;
  int radius = 0;
  double extension_tail = 0.0;
  /// The extension tail at `radius` exceeds the tolerance.
  bool flagged = false;
};

/// c_M(x, z, xi) = sum_{|alpha| < M} i^{-|alpha|}/alpha! d_eta^alpha p~(x, grad phi(x, xi))
///                 d_y^alpha [e^{i Psi(x, y, xi)} a(y, z, xi)] at y = x,
/// with p~ the extension of p to real frequencies, tabulated on grid x grid x window.
PtExpansion compose_pt_asymptotic(const ToroidalSymbol& p, const PhaseFunction& phi, const TorusAmplitude& a,
                                  int order, const TorusGrid& grid, const FrequencyWindow& window,
                                  const PtOptions& options = PtOptions());

}  // namespace tpdo
