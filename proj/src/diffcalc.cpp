#include "tpdo/diffcalc.hpp"

#include <map>
#include <sstream>

namespace tpdo::diffcalc {

Rational falling_factorial(const LatticePoint& xi, const LatticePoint& gamma) {
  if (xi.size() != gamma.size()) throw Mismatch("falling_factorial: dimension mismatch");
  Rational value = 1;
  for (int j = 0; j < xi.size(); ++j) {
    const int x = xi[j];
    const int g = gamma[j];
    if (g > 0) {
      for (int i = 0; i < g; ++i) value *= Rational(x - i);
    } else if (g < 0) {
      for (int i = g + 1; i <= 0; ++i) {
        if (x - i == 0) {
          throw DivisionByZero("falling_factorial: factor (" + std::to_string(x) + " - " + std::to_string(i) +
                               ") vanishes for negative exponent " + std::to_string(g));
        }
        value /= Rational(x - i);
      }
    }
  }
  return value;
}

double falling_factorial(double x, int k) {
  double v = 1.0;
  for (int i = 0; i < k; ++i) v *= x - i;
  return v;
}

namespace {

// F_d(b) = I_k^b F_{d-1}(k), F_0 = 1, with I_k^b = sum_{0<=k<b} for b >= 0 and
// I_k^b = -sum_{b<=k<0} for b < 0.
class NestedChain {
 public:
  Rational at(int b, int depth) {
    if (depth == 0) return 1;
    const auto key = std::make_pair(b, depth);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Rational s = 0;
    if (b >= 0) {
      for (int k = 0; k < b; ++k) s += at(k, depth - 1);
    } else {
      for (int k = b; k < 0; ++k) s -= at(k, depth - 1);
    }
    memo_.emplace(key, s);
    return s;
  }

 private:
  std::map<std::pair<int, int>, Rational> memo_;
};

}  // namespace

Rational nested_sum(const LatticePoint& theta, const MultiIndex& alpha) {
  if (theta.size() != alpha.size()) throw Mismatch("nested_sum: dimension mismatch");
  NestedChain chain;
  Rational value = 1;
  for (int j = 0; j < theta.size(); ++j) value *= chain.at(theta[j], alpha[j]);
  return value;
}

std::optional<IntBox> bound_stencil(const LatticePoint& theta, const MultiIndex& alpha, BoundStencil stencil) {
  if (stencil == BoundStencil::Box) return q_box(theta);
  const int m = alpha.first_nonzero();
  if (m < 0) return IntBox(LatticePoint(theta.size(), 0), LatticePoint(theta.size(), 0));
  if (theta[m] == 0) return std::nullopt;
  LatticePoint lo(theta.size(), 0), hi(theta.size(), 0);
  for (int j = 0; j < m; ++j) lo[j] = hi[j] = theta[j];
  if (theta[m] > 0) {
    lo[m] = 0;
    hi[m] = theta[m] - 1;
  } else {
    lo[m] = theta[m];
    hi[m] = -1;
  }
  return IntBox(lo, hi);
}

double taylor_constant(int dim, int order) {
  double c = 0.0;
  for (const auto& a : indices_of_order(dim, order)) c += 1.0 / static_cast<double>(a.factorial());
  return c;
}

// ---------------------------------------------------------------------------
// Finite differences (Fornberg 1988)
// ---------------------------------------------------------------------------

std::vector<double> fornberg_weights(int deriv, const std::vector<double>& nodes) {
  const int n = static_cast<int>(nodes.size());
  if (deriv < 0 || deriv >= n) throw InvalidArgument("fornberg_weights: need more nodes than the derivative order");
  std::vector<std::vector<double>> c(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(deriv + 1), 0.0));
  double c1 = 1.0;
  double c4 = nodes[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, deriv);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[static_cast<std::size_t>(i)];
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = c[i][deriv];
  return w;
}

std::vector<double> central_stencil(int deriv, int accuracy) {
  if (accuracy < 2 || accuracy % 2 != 0) throw InvalidArgument("central_stencil: accuracy must be even and >= 2");
  const int points = 2 * ((deriv + 1) / 2) - 1 + accuracy;
  const int half = points / 2;
  std::vector<double> nodes;
  for (int k = -half; k <= half; ++k) nodes.push_back(k);
  return nodes;
}

Complex smooth_derivative(const SmoothFunction& p, const MultiIndex& alpha, const RealPoint& x,
                          const SmoothBoundOptions& options) {
  if (p.derivative) return p.derivative(alpha, x);
  if (alpha.order() == 0) return p.value(x);
  // Tensor product of one-dimensional central stencils.
  struct Axis {
    std::vector<double> nodes, weights;
  };
  std::vector<Axis> axes(static_cast<std::size_t>(p.dim));
  for (int j = 0; j < p.dim; ++j) {
    if (alpha[j] == 0) {
      axes[static_cast<std::size_t>(j)] = {{0.0}, {1.0}};
    } else {
      auto nodes = central_stencil(alpha[j], options.fd_accuracy);
      auto w = fornberg_weights(alpha[j], nodes);
      const double scale = std::pow(options.fd_step, -alpha[j]);
      for (auto& wi : w) wi *= scale;
      axes[static_cast<std::size_t>(j)] = {nodes, w};
    }
  }
  LatticePoint lo(p.dim, 0), hi(p.dim, 0);
  for (int j = 0; j < p.dim; ++j) hi[j] = static_cast<int>(axes[static_cast<std::size_t>(j)].nodes.size()) - 1;
  Complex acc = 0.0;
  IntBox(lo, hi).for_each([&](const LatticePoint& idx) {
    RealPoint y = x;
    double w = 1.0;
    for (int j = 0; j < p.dim; ++j) {
      const auto& ax = axes[static_cast<std::size_t>(j)];
      y[j] += ax.nodes[static_cast<std::size_t>(idx[j])] * options.fd_step;
      w *= ax.weights[static_cast<std::size_t>(idx[j])];
    }
    if (w != 0.0) acc += w * p.value(y);
  });
  return acc;
}

namespace {
double power_monomial(const RealPoint& theta, const MultiIndex& alpha) {
  double v = 1.0;
  for (int j = 0; j < theta.size(); ++j) v *= std::pow(theta[j], alpha[j]);
  return v;
}

double sampled_peak(const SmoothFunction& p, const RealPoint& xi, const RealPoint& theta, int order,
                    const MultiIndex& omega, int samples, const SmoothBoundOptions& options) {
  const int n = p.dim;
  LatticePoint lo(n, 0), hi(n, 0);
  for (int j = 0; j < n; ++j) hi[j] = theta[j] == 0.0 ? 0 : samples - 1;
  double peak = 0.0;
  for (const auto& alpha : indices_of_order(n, order)) {
    const double mono = std::abs(power_monomial(theta, alpha));
    if (mono == 0.0) continue;
    const MultiIndex total = alpha + omega;
    IntBox(lo, hi).for_each([&](const LatticePoint& idx) {
      RealPoint y = xi;
      for (int j = 0; j < n; ++j) {
        if (hi[j] > 0) y[j] += theta[j] * static_cast<double>(idx[j]) / (samples - 1);
      }
      peak = std::max(peak, mono * std::abs(smooth_derivative(p, total, y, options)));
    });
  }
  return peak;
}
}  // namespace

SmoothBoundResult smooth_taylor_remainder_bound(const SmoothFunction& p, const RealPoint& xi, const RealPoint& theta,
                                                int order, const MultiIndex& omega, const SmoothBoundOptions& options) {
  if (xi.size() != p.dim || theta.size() != p.dim || omega.size() != p.dim) {
    throw Mismatch("smooth_taylor_remainder_bound: dimension mismatch");
  }
  if (options.samples_per_axis < 3) throw InvalidArgument("need at least 3 samples per axis");
  SmoothBoundResult result;
  const double cm = taylor_constant(p.dim, order);
  const double fine = sampled_peak(p, xi, theta, order, omega, options.samples_per_axis, options);
  const double coarse = sampled_peak(p, xi, theta, order, omega, (options.samples_per_axis + 1) / 2, options);
  result.bound = cm * fine;
  if (fine > 0.0 && std::abs(fine - coarse) > options.resolution_warning * fine) {
    std::ostringstream os;
    os << "sampling of Q(theta) may be too coarse: coarse/fine maxima " << coarse << " vs " << fine;
    result.warnings.push_back(os.str());
  }
  if (!p.derivative && order + omega.order() > 0) {
    result.warnings.push_back("derivatives from finite differences (step " + std::to_string(options.fd_step) + ")");
  }
  return result;
}

Complex smooth_taylor_remainder(const SmoothFunction& p, const RealPoint& xi, const RealPoint& theta, int order,
                                const SmoothBoundOptions& options) {
  RealPoint at = xi;
  for (int j = 0; j < p.dim; ++j) at[j] += theta[j];
  Complex r = p.value(at);
  for (const auto& alpha : indices_of_order_below(p.dim, order)) {
    r -= power_monomial(theta, alpha) * smooth_derivative(p, alpha, xi, options) /
         static_cast<double>(alpha.factorial());
  }
  return r;
}

}  // namespace tpdo::diffcalc
