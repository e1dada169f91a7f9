#pragma once

// Toroidal symbols sigma(x, xi) on T^n x Z^n, amplitudes a(x, y, xi), finite
// window estimates of the S^m_{rho,delta} seminorms, the bump function theta
// with its Euclidean transform, and the extension of toroidal symbols to real
// frequencies.

#include <optional>
#include <string>
#include <vector>

#include "tpdo/core.hpp"
#include "tpdo/torus_grid.hpp"

namespace tpdo {

/// Declared type (m, rho, delta) of a symbol or amplitude.
struct SymbolOrder {
  double m = 0.0;
  double rho = 1.0;
  double delta = 0.0;

  /// 0 <= delta < rho <= 1.
  [[nodiscard]] bool admissible() const { return delta >= 0.0 && delta < rho && rho <= 1.0; }
};

/// <xi> = (1 + |xi|^2)^{1/2}.
double japanese_bracket(const RealPoint& xi);
inline double japanese_bracket(const LatticePoint& xi) { return japanese_bracket(to_real(xi)); }

/// Grid samples of a symbol: values[x * window.size() + xi] over grid nodes x
/// and window frequencies xi (both row-major).
struct SymbolTable {
  TorusGrid grid;
  FrequencyWindow window;
  std::vector<Complex> values;

  [[nodiscard]] Complex at(std::size_t x, std::size_t xi) const { return values[x * window.size() + xi]; }
};

class ToroidalSymbol {
 public:
  using Rule = std::function<Complex(const RealPoint&, const LatticePoint&)>;

  ToroidalSymbol() = default;
  ToroidalSymbol(int dim, Rule rule, SymbolOrder order = {});

  /// A symbol known only on grid nodes and window frequencies. Queries at
  /// other x or outside the window throw OutOfDomain.
  static ToroidalSymbol from_table(SymbolTable table, SymbolOrder order = {});

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const SymbolOrder& order() const { return order_; }
  [[nodiscard]] const std::optional<SymbolTable>& table() const { return table_; }

  Complex operator()(const RealPoint& x, const LatticePoint& xi) const { return rule_(x, xi); }

  /// Samples on grid x window, in parallel over grid nodes.
  [[nodiscard]] SymbolTable tabulate(const TorusGrid& grid, const FrequencyWindow& window) const;

 private:
  int dim_ = 0;
  Rule rule_;
  SymbolOrder order_;
  std::optional<SymbolTable> table_;
};

class TorusAmplitude {
 public:
  using Rule = std::function<Complex(const RealPoint&, const RealPoint&, const LatticePoint&)>;

  TorusAmplitude() = default;
  TorusAmplitude(int dim, Rule rule, SymbolOrder order = {}) : dim_(dim), rule_(std::move(rule)), order_(order) {}

  /// a(x, y, xi) = sigma(x, xi).
  static TorusAmplitude from_symbol(const ToroidalSymbol& sigma);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const SymbolOrder& order() const { return order_; }
  Complex operator()(const RealPoint& x, const RealPoint& y, const LatticePoint& xi) const { return rule_(x, y, xi); }

 private:
  int dim_ = 0;
  Rule rule_;
  SymbolOrder order_;
};

struct ClassConstant {
  MultiIndex alpha;
  MultiIndex beta;
  double value = 0.0;
};

/// For every alpha <= alpha_max, beta <= beta_max: the sup over grid x window
/// of |Delta_xi^alpha d_x^beta sigma| <xi>^{-(m - rho|alpha| + delta|beta|)}.
/// x-derivatives are spectral, so sigma(., xi) should be resolved by the grid.
/// Throws OutOfDomain when the symbol cannot be evaluated on window + alpha_max.
std::vector<ClassConstant> class_constants(const ToroidalSymbol& sigma, const MultiIndex& alpha_max,
                                           const MultiIndex& beta_max, const TorusGrid& grid,
                                           const FrequencyWindow& window);

// ---------------------------------------------------------------------------
// theta and its transforms
// ---------------------------------------------------------------------------

/// theta_1(x) = 1 - h(|x| / 2pi) with h(t) = psi(t) / (psi(t) + psi(1 - t)),
/// psi(t) = exp(-c / t) for t > 0. Even, supported in (-2pi, 2pi), theta(0) = 1,
/// theta(pi - y) + theta(pi + y) = 1. In n dimensions theta is the tensor
/// product. The transform is computed by the trapezoid rule over [-2pi, 2pi]
/// at the given step; the samples are kept for that purpose.
class ThetaFunction {
 public:
  explicit ThetaFunction(double steepness = 1.0, double step = kTwoPi / 512);

  [[nodiscard]] double steepness() const { return steepness_; }
  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] double operator()(const RealPoint& x) const;

  [[nodiscard]] double step() const { return step_; }
  /// theta(j * step) for j = 0 .. 2pi / step (the non-negative half).
  [[nodiscard]] const std::vector<double>& samples() const { return samples_; }

  /// theta^_E(xi) in one dimension (real because theta is even).
  [[nodiscard]] double transform(double xi) const;
  /// Product over axes.
  [[nodiscard]] double transform(const RealPoint& xi) const;

  /// Transform of x -> (-ix / (1 - e^{ix}))^k theta(x) in one dimension.
  [[nodiscard]] Complex phi(int k, double xi) const;

 private:
  double steepness_;
  double step_;
  std::vector<double> samples_;
  // -ix / (1 - e^{ix}) at x = j * step, zero where theta vanishes.
  std::vector<Complex> factor_;
};

ThetaFunction build_theta(double steepness = 1.0);

inline double theta_hat(const ThetaFunction& theta, const RealPoint& xi) { return theta.transform(xi); }

/// phi_alpha(xi) = prod_j phi_{alpha_j}(xi_j); phi_0 = theta^.
Complex phi_alpha(const ThetaFunction& theta, const MultiIndex& alpha, const RealPoint& xi);

/// (-ix / (1 - e^{ix}))^k, continued by 1 at x = 0.
Complex phi_factor(double x, int k);

// ---------------------------------------------------------------------------
// Extension to real frequencies
// ---------------------------------------------------------------------------

/// a(x, xi) = sum_{|eta - round(xi)|_inf <= R} theta^(xi - eta) sigma(x, eta).
class ExtendedSymbol {
 public:
  ExtendedSymbol(ToroidalSymbol sigma, ThetaFunction theta, int radius);

  [[nodiscard]] int dim() const { return sigma_.dim(); }
  [[nodiscard]] int radius() const { return radius_; }
  [[nodiscard]] const ToroidalSymbol& source() const { return sigma_; }
  [[nodiscard]] const ThetaFunction& theta() const { return theta_; }

  Complex operator()(const RealPoint& x, const RealPoint& xi) const;

  /// Mass of |theta^| outside the truncation cube, maximised over sampled
  /// fractional offsets: the sum leaves out at most this many multiples of
  /// sup |sigma| over the neglected frequencies.
  [[nodiscard]] double tail() const;

 private:
  ToroidalSymbol sigma_;
  ThetaFunction theta_;
  int radius_;
};

/// Neglected theta^ mass for truncation radius R in dimension n.
double extension_tail(const ThetaFunction& theta, int dim, int radius);

/// Smallest R with extension_tail(R) <= tolerance; throws InvalidArgument if
/// none up to max_radius.
int extension_radius(const ThetaFunction& theta, int dim, double tolerance, int max_radius = 80);

inline constexpr int kDefaultExtensionRadius = 12;

ExtendedSymbol extend_symbol(const ToroidalSymbol& sigma, const ThetaFunction& theta,
                             int radius = kDefaultExtensionRadius);

}  // namespace tpdo
