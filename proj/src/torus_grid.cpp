#include "tpdo/torus_grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace tpdo {

TorusGrid::TorusGrid(int dim, int points) : dim_(dim), points_(points) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("torus dimension must lie in [1, 3]");
  if (points < 4 || points % 2 != 0) throw InvalidArgument("points per axis must be even and >= 4");
  size_ = 1;
  for (int i = 0; i < dim; ++i) size_ *= static_cast<std::size_t>(points);
}

LatticePoint TorusGrid::node_index(std::size_t linear) const {
  LatticePoint j(dim_);
  for (int i = dim_ - 1; i >= 0; --i) {
    j[i] = static_cast<int>(linear % static_cast<std::size_t>(points_));
    linear /= static_cast<std::size_t>(points_);
  }
  return j;
}

RealPoint TorusGrid::node(std::size_t linear) const {
  const LatticePoint j = node_index(linear);
  RealPoint x(dim_);
  for (int i = 0; i < dim_; ++i) x[i] = spacing() * j[i];
  return x;
}

std::size_t TorusGrid::linear_index(const LatticePoint& j) const {
  std::size_t idx = 0;
  for (int i = 0; i < dim_; ++i) {
    const int wrapped = ((j[i] % points_) + points_) % points_;
    idx = idx * static_cast<std::size_t>(points_) + static_cast<std::size_t>(wrapped);
  }
  return idx;
}

FrequencyWindow::FrequencyWindow(int dim, int cutoff, bool symmetric) : cutoff_(cutoff), symmetric_(symmetric) {
  if (cutoff < 1) throw InvalidArgument("window cutoff must be >= 1");
  box_ = IntBox::cube(dim, -cutoff, symmetric ? cutoff : cutoff - 1);
}

bool FrequencyWindow::fits(const TorusGrid& grid) const {
  if (grid.dim() != dim()) return false;
  const int span = symmetric_ ? 2 * cutoff_ + 1 : 2 * cutoff_;
  return span <= grid.points();
}

void FrequencyWindow::check_fits(const TorusGrid& grid) const {
  if (grid.dim() != dim()) throw Mismatch("window and grid dimensions differ");
  if (!fits(grid)) {
    throw Mismatch("window K=" + std::to_string(cutoff_) + (symmetric_ ? " (symmetric)" : "") +
                   " aliases on a grid with N=" + std::to_string(grid.points()));
  }
}

GridFunction::GridFunction(const TorusGrid& grid, std::vector<Complex> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid.size()) throw Mismatch("grid function length does not match its grid");
  for (const auto& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InvalidArgument("grid function has non-finite entries");
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  if (!(grid_ == other.grid_)) throw Mismatch("grid functions live on different grids");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  if (!(grid_ == other.grid_)) throw Mismatch("grid functions live on different grids");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(Complex s) {
  for (auto& v : values_) v *= s;
  return *this;
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

SpectralFunction::SpectralFunction(const FrequencyWindow& window, std::vector<Complex> coeffs)
    : window_(window), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != window.size()) throw Mismatch("spectral function length does not match its window");
}

// ---------------------------------------------------------------------------
// FFT plumbing
// ---------------------------------------------------------------------------

namespace {

// Plans are created once per (dim, N, sign) and executed with the new-array
// interface, which FFTW documents as thread-safe.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int dim, int points, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, points, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = 1;
    int dims[kMaxDim];
    for (int i = 0; i < dim; ++i) {
      dims[i] = points;
      total *= static_cast<std::size_t>(points);
    }
    auto* in = fftw_alloc_complex(total);
    auto* out = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(dim, dims, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (plan == nullptr) throw Error("FFTW could not create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(const TorusGrid& grid, int sign, const std::vector<Complex>& in, std::vector<Complex>& out) {
  fftw_plan plan = plan_cache().get(grid.dim(), grid.points(), sign);
  // std::complex<double> is layout-compatible with fftw_complex.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan, src, dst);
}

}  // namespace

std::vector<Complex> grid_spectrum(const GridFunction& f) {
  const auto& grid = f.grid();
  std::vector<Complex> in(f.values().begin(), f.values().end());
  std::vector<Complex> out(grid.size());
  execute(grid, FFTW_FORWARD, in, out);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& v : out) v *= scale;
  return out;
}

GridFunction grid_synthesis(const TorusGrid& grid, std::vector<Complex> bins) {
  if (bins.size() != grid.size()) throw Mismatch("bin count does not match the grid");
  std::vector<Complex> out(grid.size());
  execute(grid, FFTW_BACKWARD, bins, out);
  GridFunction g(grid);
  std::copy(out.begin(), out.end(), g.values().begin());
  return g;
}

namespace {
std::size_t bin_of(const TorusGrid& grid, const LatticePoint& xi) {
  std::size_t idx = 0;
  for (int i = 0; i < grid.dim(); ++i) {
    idx = idx * static_cast<std::size_t>(grid.points()) + static_cast<std::size_t>(fft_bin(xi[i], grid.points()));
  }
  return idx;
}
}  // namespace

SpectralFunction forward_transform(const GridFunction& f, const FrequencyWindow& window) {
  window.check_fits(f.grid());
  const auto bins = grid_spectrum(f);
  SpectralFunction out(window);
  for (std::size_t k = 0; k < window.size(); ++k) out.coeffs()[k] = bins[bin_of(f.grid(), window.frequency(k))];
  return out;
}

GridFunction inverse_transform(const SpectralFunction& spectrum, const TorusGrid& grid) {
  spectrum.window().check_fits(grid);
  std::vector<Complex> bins(grid.size(), Complex{});
  const auto& window = spectrum.window();
  for (std::size_t k = 0; k < window.size(); ++k) bins[bin_of(grid, window.frequency(k))] += spectrum.coeffs()[k];
  return grid_synthesis(grid, std::move(bins));
}

GridFunction spectral_derivative(const GridFunction& f, const MultiIndex& beta) {
  const auto& grid = f.grid();
  if (beta.size() != grid.dim()) throw Mismatch("derivative order has the wrong dimension");
  if (beta.order() == 0) return f;
  auto bins = grid_spectrum(f);
  const int points = grid.points();
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const LatticePoint j = grid.node_index(b);
    Complex factor = 1.0;
    for (int i = 0; i < grid.dim(); ++i) {
      const int xi = signed_frequency(j[i], points);
      if (beta[i] == 0) continue;
      if (xi == -points / 2 && beta[i] % 2 == 1) {
        factor = 0.0;
        break;
      }
      factor *= std::pow(Complex(0.0, xi), beta[i]);
    }
    bins[b] *= factor;
  }
  return grid_synthesis(grid, std::move(bins));
}

double l2_norm(const GridFunction& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  return std::sqrt(s / static_cast<double>(f.size()));
}

double l2_norm(const SpectralFunction& spectrum) {
  double s = 0.0;
  for (const auto& v : spectrum.coeffs()) s += std::norm(v);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Euclidean transform
// ---------------------------------------------------------------------------

Complex trapezoid_ft(const std::function<Complex(const RealPoint&)>& f, const RealBox& support, const RealPoint& xi,
                     double h) {
  const int n = support.dim();
  if (xi.size() != n) throw Mismatch("frequency and support box dimensions differ");
  if (!(h > 0.0)) throw InvalidArgument("quadrature step must be positive");
  LatticePoint cells(n), lo(n, 0);
  std::vector<double> step(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double len = support.hi[j] - support.lo[j];
    if (!(len >= 0.0) || !std::isfinite(len)) throw InvalidArgument("support box must be finite");
    cells[j] = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
    step[static_cast<std::size_t>(j)] = len / cells[j];
  }
  Complex acc = 0.0;
  IntBox(lo, cells).for_each([&](const LatticePoint& idx) {
    RealPoint x(n);
    double w = 1.0;
    for (int j = 0; j < n; ++j) {
      x[j] = support.lo[j] + step[static_cast<std::size_t>(j)] * idx[j];
      w *= step[static_cast<std::size_t>(j)] * ((idx[j] == 0 || idx[j] == cells[j]) ? 0.5 : 1.0);
    }
    const Complex v = f(x);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InvalidArgument("non-finite sample in euclidean_ft");
    acc += w * v * std::polar(1.0, -dot(x, xi));
  });
  return acc / std::pow(kTwoPi, n);
}

QuadratureValue euclidean_ft(const std::function<Complex(const RealPoint&)>& f, const RealBox& support,
                             const RealPoint& xi, double h) {
  const Complex coarse = trapezoid_ft(f, support, xi, h);
  const Complex fine = trapezoid_ft(f, support, xi, h / 2);
  return {coarse, std::abs(coarse - fine)};
}

}  // namespace tpdo
