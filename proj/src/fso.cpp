#include "tpdo/fso.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "tpdo/diffcalc.hpp"

namespace tpdo {

namespace {

// d^beta g(x) for every beta, from the grid spectrum of g in FFT order. The
// Nyquist bin only contributes to underived values, as a cosine.
std::vector<Complex> spectral_jet(const TorusGrid& grid, const std::vector<Complex>& bins, const RealPoint& x,
                                  const std::vector<MultiIndex>& betas) {
  const int n = grid.dim(), N = grid.points();
  std::vector<Complex> out(betas.size(), Complex{});
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (bins[b] == Complex{}) continue;
    const LatticePoint bin = grid.node_index(b);
    Complex base = bins[b];
    bool nyquist = false;
    for (int j = 0; j < n; ++j) {
      if (bin[j] == N / 2) {
        nyquist = true;
        base *= std::cos(x[j] * (N / 2));
      } else {
        base *= std::polar(1.0, x[j] * signed_frequency(bin[j], N));
      }
    }
    for (std::size_t k = 0; k < betas.size(); ++k) {
      const MultiIndex& beta = betas[k];
      if (beta.order() == 0) {
        out[k] += base;
        continue;
      }
      if (nyquist) {
        bool touches = false;
        for (int j = 0; j < n; ++j) touches = touches || (bin[j] == N / 2 && beta[j] > 0);
        if (touches) continue;
      }
      Complex f = base;
      for (int j = 0; j < n; ++j)
        for (int r = 0; r < beta[j]; ++r) f *= Complex(0.0, signed_frequency(bin[j], N));
      out[k] += f;
    }
  }
  return out;
}

std::size_t node_of(const TorusGrid& grid, const RealPoint& x) {
  LatticePoint j(grid.dim());
  for (int i = 0; i < grid.dim(); ++i) {
    const double t = x[i] / grid.spacing();
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-9) throw OutOfDomain("point is not a grid node");
    j[i] = static_cast<int>(((static_cast<long long>(r) % grid.points()) + grid.points()) % grid.points());
  }
  return grid.linear_index(j);
}

// Truncated multivariate Taylor polynomial: coefficients d^alpha f / alpha!
// over the basis {|alpha| < M}.
class Jet {
 public:
  explicit Jet(const std::vector<MultiIndex>& basis) : basis_(&basis), c_(basis.size(), Complex{}) {
    for (std::size_t i = 0; i < basis.size(); ++i) index_.emplace(basis[i], i);
  }
  Complex& operator[](std::size_t i) { return c_[i]; }
  Complex operator[](std::size_t i) const { return c_[i]; }

  [[nodiscard]] Jet times(const Jet& other) const {
    Jet out(*basis_);
    const int top = basis_->empty() ? 0 : basis_->back().order();
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (c_[i] == Complex{}) continue;
      for (std::size_t k = 0; k < c_.size(); ++k) {
        if (other.c_[k] == Complex{}) continue;
        const MultiIndex sum = (*basis_)[i] + (*basis_)[k];
        if (sum.order() > top) continue;
        out.c_[index_.at(sum)] += c_[i] * other.c_[k];
      }
    }
    return out;
  }

  /// exp of a jet with vanishing constant term.
  [[nodiscard]] Jet exp() const {
    Jet out(*basis_), power(*basis_);
    out.c_[0] = power.c_[0] = 1.0;
    const int top = basis_->empty() ? 0 : basis_->back().order();
    double fact = 1.0;
    for (int k = 1; k <= top; ++k) {
      power = power.times(*this);
      fact *= k;
      for (std::size_t i = 0; i < c_.size(); ++i) out.c_[i] += power.c_[i] / fact;
    }
    return out;
  }

 private:
  const std::vector<MultiIndex>* basis_;
  std::vector<Complex> c_;
  std::map<MultiIndex, std::size_t> index_;
};

TorusGrid default_resolution(int dim, int resolution) {
  if (resolution > 0) return {dim, resolution};
  return {dim, dim == 1 ? 64 : dim == 2 ? 32 : 16};
}

}  // namespace

// ---------------------------------------------------------------------------
// PhaseFunction
// ---------------------------------------------------------------------------

struct PhaseFunction::Cache {
  std::mutex mutex;
  std::map<LatticePoint, std::vector<Complex>> spectra;
};

PhaseFunction::PhaseFunction(int dim, Periodic periodic, Linear linear, Gradient periodic_gradient, int resolution)
    : dim_(dim),
      periodic_(std::move(periodic)),
      linear_(std::move(linear)),
      periodic_gradient_(std::move(periodic_gradient)),
      grid_(default_resolution(dim, resolution)),
      cache_(std::make_shared<Cache>()) {}

PhaseFunction PhaseFunction::standard(int dim) {
  return PhaseFunction(dim, {}, {}, [dim](const RealPoint&, const LatticePoint&) { return RealPoint(dim); });
}

PhaseFunction PhaseFunction::shifted(const RealPoint& tau) {
  const int n = tau.size();
  return PhaseFunction(
      n, [tau](const RealPoint&, const LatticePoint& xi) { return dot(tau, to_real(xi)); }, {},
      [n](const RealPoint&, const LatticePoint&) { return RealPoint(n); });
}

RealPoint PhaseFunction::linear(const LatticePoint& xi) const { return linear_ ? linear_(xi) : to_real(xi); }

double PhaseFunction::periodic(const RealPoint& x, const LatticePoint& xi) const {
  return periodic_ ? periodic_(x, xi) : 0.0;
}

double PhaseFunction::operator()(const RealPoint& x, const LatticePoint& xi) const {
  return dot(x, linear(xi)) + periodic(x, xi);
}

const std::vector<Complex>& PhaseFunction::psi_spectrum(const LatticePoint& xi) const {
  std::lock_guard<std::mutex> lock(cache_->mutex);
  auto it = cache_->spectra.find(xi);
  if (it != cache_->spectra.end()) return it->second;
  auto g = GridFunction::sample(grid_, [&](const RealPoint& x) { return Complex(periodic(x, xi)); });
  return cache_->spectra.emplace(xi, grid_spectrum(g)).first->second;
}

std::vector<double> PhaseFunction::periodic_jet(const RealPoint& x, const LatticePoint& xi,
                                                const std::vector<MultiIndex>& betas) const {
  std::vector<double> out(betas.size(), 0.0);
  if (!periodic_) return out;
  const auto values = spectral_jet(grid_, psi_spectrum(xi), x, betas);
  for (std::size_t k = 0; k < betas.size(); ++k) out[k] = values[k].real();
  return out;
}

RealPoint PhaseFunction::spectral_gradient(const RealPoint& x, const LatticePoint& xi) const {
  std::vector<MultiIndex> units;
  for (int j = 0; j < dim_; ++j) units.push_back(MultiIndex::unit(dim_, j));
  const auto d = periodic_jet(x, xi, units);
  RealPoint g = linear(xi);
  for (int j = 0; j < dim_; ++j) g[j] += d[static_cast<std::size_t>(j)];
  return g;
}

RealPoint PhaseFunction::gradient(const RealPoint& x, const LatticePoint& xi) const {
  if (!periodic_gradient_) return spectral_gradient(x, xi);
  return linear(xi) + periodic_gradient_(x, xi);
}

double PhaseFunction::difference(const RealPoint& x, const LatticePoint& xi, const MultiIndex& beta) const {
  double s = 0.0;
  for (const auto& gamma : indices_below_or_equal(beta)) {
    const double sign = ((beta.order() - gamma.order()) & 1) ? -1.0 : 1.0;
    s += sign * binomial(beta, gamma) * (*this)(x, xi + gamma.as_point());
  }
  return s;
}

double psi_correction(const PhaseFunction& phi, const RealPoint& x, const RealPoint& y, const LatticePoint& xi) {
  return phi(y, xi) - phi(x, xi) + dot(x - y, phi.gradient(x, xi));
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

void check_table_size(const TorusGrid& grid, const FrequencyWindow& window) {
  if (grid.dim() != window.dim()) throw Mismatch("grid and window dimensions differ");
  if (grid.dim() > 2) throw InvalidArgument("amplitude tables are limited to n <= 2");
  if (grid.dim() == 2 && (window.cutoff() > 8 || grid.points() > 16))
    throw InvalidArgument("two-dimensional amplitude tables need K <= 8 and N <= 16");
  if (static_cast<double>(grid.size()) * static_cast<double>(grid.size()) * static_cast<double>(window.size()) > 3e7)
    throw InvalidArgument("amplitude table too large");
}

AmplitudeTable tabulate_amplitude(const TorusAmplitude& a, const TorusGrid& grid, const FrequencyWindow& window) {
  check_table_size(grid, window);
  AmplitudeTable t{grid, window, std::vector<Complex>(grid.size() * grid.size() * window.size())};
  parallel_for(grid.size(), [&](std::size_t i) {
    const RealPoint x = grid.node(i);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const RealPoint z = grid.node(j);
      for (std::size_t k = 0; k < window.size(); ++k)
        t.values[(i * grid.size() + j) * window.size() + k] = a(x, z, window.frequency(k));
    }
  });
  return t;
}

TorusAmplitude tabulated_amplitude(AmplitudeTable table, SymbolOrder order) {
  auto shared = std::make_shared<const AmplitudeTable>(std::move(table));
  return {shared->grid.dim(),
          [shared](const RealPoint& x, const RealPoint& z, const LatticePoint& xi) {
            if (!shared->window.contains(xi)) throw OutOfDomain("frequency " + to_string(xi) + " outside the table");
            return shared->at(node_of(shared->grid, x), node_of(shared->grid, z), shared->window.index(xi));
          },
          order};
}

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

GridFunction apply_fso(const PhaseFunction& phi, const TorusAmplitude& a, const GridFunction& u,
                       const FrequencyWindow& window) {
  const TorusGrid& grid = u.grid();
  window.check_fits(grid);
  const double scale = 1.0 / static_cast<double>(grid.size());
  GridFunction out(grid);
  parallel_for(grid.size(), [&](std::size_t i) {
    const RealPoint x = grid.node(i);
    Complex total{};
    for (std::size_t k = 0; k < window.size(); ++k) {
      const LatticePoint xi = window.frequency(k);
      Complex inner{};
      for (std::size_t j = 0; j < grid.size(); ++j)
        if (u[j] != Complex{}) inner += node_phase(grid, grid.node_index(j), -xi) * a(x, grid.node(j), xi) * u[j];
      total += std::polar(1.0, phi(x, xi)) * inner * scale;
    }
    out[i] = total;
  });
  return out;
}

GridFunction apply_fso(const PhaseFunction& phi, const ToroidalSymbol& a, const GridFunction& u,
                       const FrequencyWindow& window) {
  const TorusGrid& grid = u.grid();
  const SpectralFunction uh = forward_transform(u, window);
  GridFunction out(grid);
  parallel_for(grid.size(), [&](std::size_t i) {
    const RealPoint x = grid.node(i);
    Complex total{};
    for (std::size_t k = 0; k < window.size(); ++k) {
      const Complex c = uh.coeffs()[k];
      if (c == Complex{}) continue;
      const LatticePoint xi = window.frequency(k);
      total += std::polar(1.0, phi(x, xi)) * a(x, xi) * c;
    }
    out[i] = total;
  });
  return out;
}

OperatorMatrix fso_matrix(const PhaseFunction& phi, const TorusAmplitude& a, const TorusGrid& grid,
                          const FrequencyWindow& window, const FrequencyWindow& cols) {
  return operator_matrix([&](const GridFunction& u) { return apply_fso(phi, a, u, window); }, grid, cols);
}

NormEstimate fso_norm_probe(const PhaseFunction& phi, const TorusAmplitude& a, const TorusGrid& grid,
                            const FrequencyWindow& window, const PowerIterationOptions& options) {
  return operator_norm(fso_matrix(phi, a, grid, window, window), options);
}

FsoConditionsReport check_fso_l2_conditions(const PhaseFunction& phi, const ToroidalSymbol& a, const TorusGrid& grid,
                                            const FrequencyWindow& window, int alpha_cap, double threshold) {
  const int n = grid.dim();
  if (alpha_cap < 0) alpha_cap = 2 * n + 1;
  const auto alphas = indices_of_order_below(n, alpha_cap + 1);
  FsoConditionsReport r;
  for (const auto& alpha : alphas) r.table.push_back({alpha, 0.0, 0.0});

  for (std::size_t k = 0; k < window.size(); ++k) {
    const LatticePoint xi = window.frequency(k);
    const auto ak = GridFunction::sample(grid, [&](const RealPoint& x) { return a(x, xi); });
    for (std::size_t ai = 0; ai < alphas.size(); ++ai)
      r.table[ai].amplitude = std::max(r.table[ai].amplitude, spectral_derivative(ak, alphas[ai]).max_abs());
    for (int j = 0; j < n; ++j) {
      const LatticePoint next = xi + MultiIndex::unit(n, j).as_point();
      const RealPoint dl = phi.linear(next) - phi.linear(xi);
      const auto dpsi =
          GridFunction::sample(grid, [&](const RealPoint& x) { return Complex(phi.periodic(x, next) - phi.periodic(x, xi)); });
      for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        const MultiIndex& alpha = alphas[ai];
        GridFunction d = spectral_derivative(dpsi, alpha);
        if (alpha.order() == 0) {
          for (std::size_t i = 0; i < grid.size(); ++i) d[i] += dot(grid.node(i), dl);
        } else if (alpha.order() == 1) {
          const int axis = alpha.first_nonzero();
          for (std::size_t i = 0; i < grid.size(); ++i) d[i] += dl[axis];
        }
        r.table[ai].phase_difference = std::max(r.table[ai].phase_difference, d.max_abs());
      }
    }
  }

  r.graph_constant = std::numeric_limits<double>::infinity();
  if (phi.has_analytic_gradient()) r.gradient_mismatch = 0.0;
  std::vector<RealPoint> grads(window.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const RealPoint x = grid.node(i);
    for (std::size_t k = 0; k < window.size(); ++k) {
      grads[k] = phi.gradient(x, window.frequency(k));
      if (phi.has_analytic_gradient()) {
        const RealPoint s = phi.spectral_gradient(x, window.frequency(k));
        for (int j = 0; j < n; ++j) r.gradient_mismatch = std::max(r.gradient_mismatch, std::abs(s[j] - grads[k][j]));
      }
    }
    for (std::size_t k = 0; k < window.size(); ++k)
      for (std::size_t l = k + 1; l < window.size(); ++l) {
        const RealPoint dk = to_real(window.frequency(k) - window.frequency(l));
        const RealPoint dg = grads[k] - grads[l];
        const double ratio = std::sqrt(dot(dg, dg)) / std::sqrt(dot(dk, dk));
        r.graph_constant = std::min(r.graph_constant, ratio);
        if (ratio <= 1e-12) ++r.degenerate_pairs;
      }
  }
  if (window.size() < 2) r.graph_constant = 0.0;

  r.bounded = true;
  for (const auto& e : r.table)
    r.bounded = r.bounded && std::isfinite(e.amplitude) && std::isfinite(e.phase_difference) &&
                e.amplitude <= threshold && e.phase_difference <= threshold;
  r.graph_ok = r.graph_constant > 1e-12;
  r.pass = r.bounded && r.graph_ok;
  return r;
}

// ---------------------------------------------------------------------------
// Compositions
// ---------------------------------------------------------------------------

AmplitudeTable compose_tp_direct(const TorusAmplitude& a, const ToroidalSymbol& p, const TorusGrid& grid,
                                 const FrequencyWindow& xi_window, const FrequencyWindow& eta_window) {
  check_table_size(grid, xi_window);
  xi_window.check_fits(grid);
  eta_window.check_fits(grid);
  const std::size_t G = grid.size(), E = eta_window.size(), W = xi_window.size();
  const SymbolTable pt = p.tabulate(grid, eta_window);
  const double scale = 1.0 / static_cast<double>(G);
  AmplitudeTable c{grid, xi_window, std::vector<Complex>(G * G * W)};
  parallel_for(G, [&](std::size_t i) {
    const RealPoint x = grid.node(i);
    std::vector<Complex> ay(G), s(E);
    for (std::size_t k = 0; k < W; ++k) {
      const LatticePoint xi = xi_window.frequency(k);
      for (std::size_t y = 0; y < G; ++y) ay[y] = a(x, grid.node(y), xi);
      for (std::size_t e = 0; e < E; ++e) {
        const LatticePoint shift = eta_window.frequency(e) - xi;
        Complex acc{};
        for (std::size_t y = 0; y < G; ++y) acc += node_phase(grid, grid.node_index(y), shift) * ay[y] * pt.at(y, e);
        s[e] = acc * scale;
      }
      for (std::size_t z = 0; z < G; ++z) {
        const LatticePoint jz = grid.node_index(z);
        Complex acc{};
        for (std::size_t e = 0; e < E; ++e) acc += node_phase(grid, jz, xi - eta_window.frequency(e)) * s[e];
        c.values[(i * G + z) * W + k] = acc;
      }
    }
  });
  return c;
}

TorusAmplitude compose_tp_asymptotic(const TorusAmplitude& a, const ToroidalSymbol& p, int order,
                                     const TorusGrid& grid) {
  if (order < 1) throw InvalidArgument("compose_tp_asymptotic: order must be >= 1");
  if (a.dim() != grid.dim() || p.dim() != grid.dim()) throw Mismatch("dimensions differ");
  const int n = grid.dim();
  const auto alphas = indices_of_order_below(n, order);
  // (-omega)^(alpha) / alpha! per grid frequency.
  std::vector<std::vector<double>> weights(alphas.size(), std::vector<double>(grid.size()));
  for (std::size_t ai = 0; ai < alphas.size(); ++ai)
    for (std::size_t b = 0; b < grid.size(); ++b) {
      const LatticePoint bin = grid.node_index(b);
      double w = 1.0;
      for (int j = 0; j < n; ++j) w *= diffcalc::falling_factorial(-signed_frequency(bin[j], grid.points()), alphas[ai][j]);
      weights[ai][b] = w / static_cast<double>(alphas[ai].factorial());
    }
  SymbolOrder ord = a.order();
  ord.m += p.order().m;
  return {n,
          [a, p, grid, alphas, weights](const RealPoint& x, const RealPoint& z, const LatticePoint& xi) {
            Complex total{};
            for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
              const MultiIndex& alpha = alphas[ai];
              auto g = GridFunction::sample(grid, [&](const RealPoint& y) {
                Complex dp{};
                for (const auto& gamma : indices_below_or_equal(alpha)) {
                  const double sign = ((alpha.order() - gamma.order()) & 1) ? -1.0 : 1.0;
                  dp += sign * binomial(alpha, gamma) * p(y, xi + gamma.as_point());
                }
                return a(x, y, xi) * dp;
              });
              const auto bins = grid_spectrum(g);
              for (std::size_t b = 0; b < bins.size(); ++b) {
                if (weights[ai][b] == 0.0 || bins[b] == Complex{}) continue;
                const LatticePoint bin = grid.node_index(b);
                double s = 0.0;
                for (int j = 0; j < x.size(); ++j) s += z[j] * signed_frequency(bin[j], grid.points());
                total += weights[ai][b] * std::polar(1.0, s) * bins[b];
              }
            }
            return total;
          },
          ord};
}

PtExpansion compose_pt_asymptotic(const ToroidalSymbol& p, const PhaseFunction& phi, const TorusAmplitude& a,
                                  int order, const TorusGrid& grid, const FrequencyWindow& window,
                                  const PtOptions& options) {
  if (order < 1) throw InvalidArgument("compose_pt_asymptotic: order must be >= 1");
  check_table_size(grid, window);
  window.check_fits(grid);
  const int n = grid.dim();
  PtExpansion out;
  out.radius = options.radius > 0 ? options.radius : extension_radius(options.theta, n, options.tolerance);
  out.extension_tail = extension_tail(options.theta, n, out.radius);
  out.flagged = out.extension_tail > options.tolerance;
  const ExtendedSymbol ext = extend_symbol(p, options.theta, out.radius);

  const auto alphas = indices_of_order_below(n, order);
  const std::size_t A = alphas.size(), G = grid.size(), W = window.size();
  diffcalc::SmoothBoundOptions fd;
  fd.fd_step = options.step;
  fd.fd_accuracy = options.accuracy;

  // Per (x, xi): i^{-|alpha|} d_eta^alpha p~ at grad phi, and the jet of e^{i Psi} at y = x.
  std::vector<Complex> dp(G * W * A), ejet(G * W * A);
  parallel_for(G, [&](std::size_t i) {
    const RealPoint x = grid.node(i);
    for (std::size_t k = 0; k < W; ++k) {
      const LatticePoint xi = window.frequency(k);
      const RealPoint eta = phi.gradient(x, xi);
      std::map<RealPoint, Complex> memo;
      diffcalc::SmoothFunction pe{n, [&](const RealPoint& e) {
                                    auto it = memo.find(e);
                                    if (it != memo.end()) return it->second;
                                    return memo.emplace(e, ext(x, e)).first->second;
                                  },
                                  {}};
      const auto psi = phi.periodic_jet(x, xi, alphas);
      Jet psi_jet(alphas);
      for (std::size_t ai = 0; ai < A; ++ai)
        if (alphas[ai].order() >= 2) psi_jet[ai] = Complex(0.0, psi[ai] / static_cast<double>(alphas[ai].factorial()));
      const Jet e = psi_jet.exp();
      for (std::size_t ai = 0; ai < A; ++ai) {
        Complex unit = 1.0;
        for (int r = 0; r < alphas[ai].order(); ++r) unit *= Complex(0.0, -1.0);
        dp[(i * W + k) * A + ai] = unit * diffcalc::smooth_derivative(pe, alphas[ai], eta, fd);
        ejet[(i * W + k) * A + ai] = e[ai];
      }
    }
  });

  out.table = AmplitudeTable{grid, window, std::vector<Complex>(G * G * W)};
  // Per (z, xi): y-derivatives of a(y, z, xi) on the grid, then the sum over alpha.
  parallel_for(G * W, [&](std::size_t zk) {
    const std::size_t z = zk / W, k = zk % W;
    const RealPoint zp = grid.node(z);
    const LatticePoint xi = window.frequency(k);
    const auto g = GridFunction::sample(grid, [&](const RealPoint& y) { return a(y, zp, xi); });
    std::vector<GridFunction> derivs;
    derivs.reserve(A);
    for (const auto& beta : alphas) {
      GridFunction d = beta.order() == 0 ? g : spectral_derivative(g, beta);
      d *= 1.0 / static_cast<double>(beta.factorial());
      derivs.push_back(std::move(d));
    }
    for (std::size_t i = 0; i < G; ++i) {
      Jet aj(alphas), ej(alphas);
      for (std::size_t bi = 0; bi < A; ++bi) {
        aj[bi] = derivs[bi][i];
        ej[bi] = ejet[(i * W + k) * A + bi];
      }
      const Jet prod = ej.times(aj);
      Complex total{};
      for (std::size_t ai = 0; ai < A; ++ai) total += dp[(i * W + k) * A + ai] * prod[ai];
      out.table.values[(i * G + z) * W + k] = total;
    }
  });
  return out;
}

}  // namespace tpdo
