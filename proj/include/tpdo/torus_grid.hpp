#pragma once

// Uniform grids on T^n = [0, 2pi)^n, truncated frequency windows of Z^n, the
// toroidal Fourier transform pair (normalised with d~x = (2pi)^{-n} dx), and
// trapezoid quadrature for the Euclidean transform of compactly supported data.

#include <span>
#include <vector>

#include "tpdo/core.hpp"

namespace tpdo {

class TorusGrid {
 public:
  TorusGrid() = default;
  /// n in [1, 3]; N even and >= 4.
  TorusGrid(int dim, int points);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int points() const { return points_; }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] double spacing() const { return kTwoPi / points_; }

  /// Node x_j = 2 pi j / N, with j the row-major multi-index of `linear`.
  [[nodiscard]] RealPoint node(std::size_t linear) const;
  [[nodiscard]] LatticePoint node_index(std::size_t linear) const;
  [[nodiscard]] std::size_t linear_index(const LatticePoint& j) const;
  /// Box of node indices [0, N-1]^n.
  [[nodiscard]] IntBox index_box() const { return IntBox::cube(dim_, 0, points_ - 1); }

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) { return a.dim_ == b.dim_ && a.points_ == b.points_; }

 private:
  int dim_ = 0;
  int points_ = 0;
  std::size_t size_ = 0;
};

/// {xi : -K <= xi_j <= K-1} or, when symmetric, {-K..K}.
class FrequencyWindow {
 public:
  FrequencyWindow() = default;
  FrequencyWindow(int dim, int cutoff, bool symmetric = false);

  /// The window holding every frequency a grid can resolve: {-N/2..N/2-1}.
  static FrequencyWindow full(const TorusGrid& grid) { return {grid.dim(), grid.points() / 2}; }

  [[nodiscard]] int dim() const { return box_.dim(); }
  [[nodiscard]] int cutoff() const { return cutoff_; }
  [[nodiscard]] bool symmetric() const { return symmetric_; }
  [[nodiscard]] const IntBox& box() const { return box_; }
  [[nodiscard]] std::size_t size() const { return box_.size(); }
  [[nodiscard]] bool contains(const LatticePoint& xi) const { return box_.contains(xi); }
  [[nodiscard]] std::size_t index(const LatticePoint& xi) const { return box_.linear_index(xi); }
  [[nodiscard]] LatticePoint frequency(std::size_t linear) const { return box_.point(linear); }

  /// Throws Mismatch unless the window resolves on the grid without aliasing.
  void check_fits(const TorusGrid& grid) const;
  [[nodiscard]] bool fits(const TorusGrid& grid) const;

  friend bool operator==(const FrequencyWindow& a, const FrequencyWindow& b) {
    return a.cutoff_ == b.cutoff_ && a.symmetric_ == b.symmetric_ && a.box_ == b.box_;
  }

 private:
  int cutoff_ = 0;
  bool symmetric_ = false;
  IntBox box_;
};

/// e^{i x_j . xi} at grid node j, with the product j . xi reduced mod N first.
inline Complex node_phase(const TorusGrid& grid, const LatticePoint& j, const LatticePoint& xi) {
  long long s = 0;
  for (int i = 0; i < grid.dim(); ++i) s += static_cast<long long>(j[i]) * xi[i];
  const long long r = ((s % grid.points()) + grid.points()) % grid.points();
  return std::polar(1.0, kTwoPi * static_cast<double>(r) / grid.points());
}

/// Signed frequency of FFT bin `bin` on an N-point axis, in [-N/2, N/2).
inline int signed_frequency(int bin, int points) { return bin < points / 2 ? bin : bin - points; }
/// FFT bin of the (possibly aliased) signed frequency xi.
inline int fft_bin(int xi, int points) { return ((xi % points) + points) % points; }

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(const TorusGrid& grid) : grid_(grid), values_(grid.size(), Complex{}) {}
  GridFunction(const TorusGrid& grid, std::vector<Complex> values);

  template <class F>
  static GridFunction sample(const TorusGrid& grid, F&& f) {
    GridFunction g(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) g.values_[i] = f(grid.node(i));
    return g;
  }

  [[nodiscard]] const TorusGrid& grid() const { return grid_; }
  [[nodiscard]] std::span<const Complex> values() const { return values_; }
  [[nodiscard]] std::span<Complex> values() { return values_; }
  Complex& operator[](std::size_t i) { return values_[i]; }
  const Complex& operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(Complex s);
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(Complex s, GridFunction a) { return a *= s; }

  [[nodiscard]] double max_abs() const;

 private:
  TorusGrid grid_;
  std::vector<Complex> values_;
};

class SpectralFunction {
 public:
  SpectralFunction() = default;
  explicit SpectralFunction(const FrequencyWindow& window) : window_(window), coeffs_(window.size(), Complex{}) {}
  SpectralFunction(const FrequencyWindow& window, std::vector<Complex> coeffs);

  [[nodiscard]] const FrequencyWindow& window() const { return window_; }
  [[nodiscard]] std::span<const Complex> coeffs() const { return coeffs_; }
  [[nodiscard]] std::span<Complex> coeffs() { return coeffs_; }
  Complex& at(const LatticePoint& xi) { return coeffs_[window_.index(xi)]; }
  [[nodiscard]] const Complex& at(const LatticePoint& xi) const { return coeffs_[window_.index(xi)]; }

 private:
  FrequencyWindow window_;
  std::vector<Complex> coeffs_;
};

/// Full N^n-point DFT with the forward sign convention and N^{-n} scaling,
/// i.e. the grid approximation of f^_T on every resolvable bin (FFT order).
std::vector<Complex> grid_spectrum(const GridFunction& f);
/// Inverse of grid_spectrum: synthesis sum over all bins, no scaling.
GridFunction grid_synthesis(const TorusGrid& grid, std::vector<Complex> bins);

/// f^(xi) = N^{-n} sum_j f(x_j) e^{-i x_j . xi} for xi in the window.
SpectralFunction forward_transform(const GridFunction& f, const FrequencyWindow& window);
/// sum_xi F(xi) e^{i x . xi} at every grid node.
GridFunction inverse_transform(const SpectralFunction& spectrum, const TorusGrid& grid);

/// Multiplies every resolvable coefficient by (i xi)^beta. For odd orders the
/// Nyquist bin has no well-defined sign and is dropped.
GridFunction spectral_derivative(const GridFunction& f, const MultiIndex& beta);

/// (N^{-n} sum_j |f(x_j)|^2)^{1/2}.
double l2_norm(const GridFunction& f);
/// (sum_xi |F(xi)|^2)^{1/2}.
double l2_norm(const SpectralFunction& spectrum);

// ---------------------------------------------------------------------------
// Euclidean Fourier transform by trapezoid quadrature
// ---------------------------------------------------------------------------

/// Axis-aligned real box prod_j [lo_j, hi_j].
struct RealBox {
  RealPoint lo, hi;
  [[nodiscard]] int dim() const { return lo.size(); }
};

struct QuadratureValue {
  Complex value;
  /// |T(h) - T(h/2)| (Richardson comparison of the two resolutions).
  double error_estimate = 0.0;
};

/// Trapezoid approximation of (2pi)^{-n} int_box f(x) e^{-i x.xi} dx; the
/// step is shrunk so that it divides every side of the box. The value is the
/// sum at resolution h; the estimate compares it with the sum at h/2.
QuadratureValue euclidean_ft(const std::function<Complex(const RealPoint&)>& f, const RealBox& support,
                             const RealPoint& xi, double h = kTwoPi / 256);

/// The trapezoid sum alone at step (at most) h.
Complex trapezoid_ft(const std::function<Complex(const RealPoint&)>& f, const RealBox& support, const RealPoint& xi,
                     double h);

}  // namespace tpdo
