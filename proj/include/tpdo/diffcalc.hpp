#pragma once

// Difference calculus on Z^n: forward and transposed differences, falling
// factorials, nested sums and the discrete Taylor expansion with its
// remainder bound. Everything here is a pure function of its inputs.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tpdo/core.hpp"

namespace tpdo::diffcalc {

using Rational = boost::multiprecision::cpp_rational;

inline double magnitude(const Complex& z) { return std::abs(z); }
inline double magnitude(const Rational& q) { return std::abs(static_cast<double>(q)); }
inline double magnitude(double v) { return std::abs(v); }

/// A function Z^n -> T. Either an unrestricted evaluation rule or a table on
/// a closed box; tables reject every query outside their box.
template <class T>
class BasicLatticeFunction {
 public:
  using Rule = std::function<T(const LatticePoint&)>;

  BasicLatticeFunction(int dim, Rule rule) : dim_(dim), rule_(std::move(rule)) {}

  static BasicLatticeFunction tabulate(const Rule& rule, const IntBox& window) {
    std::vector<T> values;
    values.reserve(window.size());
    window.for_each([&](const LatticePoint& p) { values.push_back(rule(p)); });
    return from_values(window, std::move(values));
  }

  static BasicLatticeFunction from_values(const IntBox& window, std::vector<T> values) {
    if (values.size() != window.size()) throw Mismatch("table size does not match its window");
    BasicLatticeFunction f(window.dim(), Rule{});
    f.window_ = window;
    f.table_ = std::move(values);
    return f;
  }

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const std::optional<IntBox>& window() const { return window_; }

  T operator()(const LatticePoint& xi) const {
    if (window_) return table_[window_->linear_index(xi)];
    return rule_(xi);
  }

  /// Fails fast when a stencil box is not covered by the table.
  void require(const IntBox& stencil, std::string_view what) const {
    if (stencil.dim() != dim_) throw Mismatch(std::string(what) + ": dimension mismatch");
    if (window_ && !window_->contains(stencil)) {
      throw OutOfDomain(std::string(what) + ": stencil " + to_string(stencil) + " leaves window " +
                        to_string(*window_));
    }
  }

 private:
  int dim_;
  Rule rule_;
  std::optional<IntBox> window_;
  std::vector<T> table_;
};

using LatticeFunction = BasicLatticeFunction<Complex>;
using ExactLatticeFunction = BasicLatticeFunction<Rational>;

namespace detail {
inline std::int64_t binomial_int(const MultiIndex& alpha, const MultiIndex& beta) {
  std::int64_t c = 1;
  for (int j = 0; j < alpha.size(); ++j) {
    std::int64_t cj = 1;
    for (int i = 1; i <= beta[j]; ++i) cj = cj * (alpha[j] - beta[j] + i) / i;
    c *= cj;
  }
  return c;
}

inline IntBox shifted_box(const LatticePoint& base, const MultiIndex& extent) {
  return {base, base + extent.as_point()};
}
}  // namespace detail

/// Delta^alpha f(xi) = sum_{beta <= alpha} (-1)^{|alpha-beta|} C(alpha,beta) f(xi+beta).
template <class T>
T forward_difference(const BasicLatticeFunction<T>& f, const MultiIndex& alpha, const LatticePoint& xi) {
  f.require(detail::shifted_box(xi, alpha), "forward_difference");
  T acc{};
  for (const auto& beta : indices_below_or_equal(alpha)) {
    const std::int64_t c = detail::binomial_int(alpha, beta);
    const T term = f(xi + beta.as_point());
    if (((alpha.order() - beta.order()) & 1) != 0) {
      acc -= T(c) * term;
    } else {
      acc += T(c) * term;
    }
  }
  return acc;
}

/// The same difference built from one-step differences; kept as an
/// independent route for cross-checking the closed form.
template <class T>
T iterated_difference(const BasicLatticeFunction<T>& f, const MultiIndex& alpha, const LatticePoint& xi) {
  const int axis = alpha.first_nonzero();
  if (axis < 0) return f(xi);
  MultiIndex rest = alpha;
  rest.set(axis, alpha[axis] - 1);
  LatticePoint next = xi;
  next[axis] += 1;
  return iterated_difference(f, rest, next) - iterated_difference(f, rest, xi);
}

/// (Delta^alpha)^t f(xi), built from backward steps phi(xi) - phi(xi - v_j).
template <class T>
T transpose_difference(const BasicLatticeFunction<T>& f, const MultiIndex& alpha, const LatticePoint& xi) {
  f.require(IntBox(xi - alpha.as_point(), xi), "transpose_difference");
  T acc{};
  for (const auto& beta : indices_below_or_equal(alpha)) {
    const std::int64_t c = detail::binomial_int(alpha, beta);
    const T term = f(xi - beta.as_point());
    if ((beta.order() & 1) != 0) {
      acc -= T(c) * term;
    } else {
      acc += T(c) * term;
    }
  }
  return acc;
}

/// xi^{(gamma)} with the three-case definition (gamma_j > 0, = 0, < 0).
/// Throws DivisionByZero when a negative exponent meets a vanishing factor.
Rational falling_factorial(const LatticePoint& xi, const LatticePoint& gamma);

/// x^{(k)} = x (x-1) ... (x-k+1) for k >= 0, in double precision.
double falling_factorial(double x, int k);

/// The depth-alpha chain of nested sums I_{k1}^theta I_{k2}^{k1} ... 1,
/// evaluated by direct summation (no closed form).
Rational nested_sum(const LatticePoint& theta, const MultiIndex& alpha);

template <class T>
struct TaylorTerm {
  MultiIndex alpha;
  T coefficient;  // Delta^alpha f(xi) / alpha!
};

/// Coefficients (alpha, Delta^alpha f(xi)/alpha!) for |alpha| < order.
template <class T>
std::vector<TaylorTerm<T>> taylor_expand(const BasicLatticeFunction<T>& f, const LatticePoint& xi, int order) {
  if (order < 0) throw InvalidArgument("taylor order must be non-negative");
  const auto alphas = indices_of_order_below(f.dim(), order);
  for (const auto& a : alphas) f.require(detail::shifted_box(xi, a), "taylor_expand");
  std::vector<TaylorTerm<T>> terms;
  terms.reserve(alphas.size());
  for (const auto& a : alphas) {
    terms.push_back({a, forward_difference(f, a, xi) / T(static_cast<std::int64_t>(a.factorial()))});
  }
  return terms;
}

/// sum_alpha coefficient * eta^{(alpha)}.
template <class T>
T taylor_value(const std::vector<TaylorTerm<T>>& terms, const LatticePoint& eta) {
  T acc{};
  for (const auto& t : terms) {
    const Rational ff = falling_factorial(eta, t.alpha.as_point());
    if constexpr (std::is_same_v<T, Rational>) {
      acc += t.coefficient * ff;
    } else {
      acc += t.coefficient * static_cast<double>(ff);
    }
  }
  return acc;
}

/// r_N(xi, eta) = f(xi+eta) - sum_{|alpha|<N} Delta^alpha f(xi) eta^{(alpha)} / alpha!.
template <class T>
T taylor_remainder(const BasicLatticeFunction<T>& f, const LatticePoint& xi, const LatticePoint& eta, int order) {
  f.require(IntBox(xi + eta, xi + eta), "taylor_remainder");
  return f(xi + eta) - taylor_value(taylor_expand(f, xi, order), eta);
}

/// Delta_xi^omega r_N(xi, eta), the quantity the remainder bound controls.
template <class T>
T remainder_difference(const BasicLatticeFunction<T>& f, const LatticePoint& xi, const LatticePoint& eta, int order,
                       const MultiIndex& omega) {
  T acc{};
  for (const auto& beta : indices_below_or_equal(omega)) {
    const std::int64_t c = detail::binomial_int(omega, beta);
    const T r = taylor_remainder(f, xi + beta.as_point(), eta, order);
    if (((omega.order() - beta.order()) & 1) != 0) {
      acc -= T(c) * r;
    } else {
      acc += T(c) * r;
    }
  }
  return acc;
}

/// Where the maximum of |Delta^{alpha+omega} f| is taken.
enum class BoundStencil {
  /// Points visited by the remainder representation: axes before the first
  /// non-zero axis m of alpha sit at theta_j, axis m runs over the half-open
  /// range between 0 and theta_m, later axes sit at 0. Sharper.
  Path,
  /// The closed box Q(theta).
  Box,
};

/// The nu-range used for one alpha under the given stencil; empty when
/// theta^{(alpha)} vanishes and the term contributes nothing.
std::optional<IntBox> bound_stencil(const LatticePoint& theta, const MultiIndex& alpha, BoundStencil stencil);

/// sum_{|alpha|=N} |eta^{(alpha)}|/alpha! * max_nu |Delta^{alpha+omega} f(xi+nu)|.
template <class T>
double remainder_bound(const BasicLatticeFunction<T>& f, const LatticePoint& xi, const LatticePoint& eta, int order,
                       const MultiIndex& omega, BoundStencil stencil = BoundStencil::Path) {
  const auto alphas = indices_of_order(f.dim(), order);
  struct Work {
    MultiIndex alpha;
    IntBox nu;
    double weight;
  };
  std::vector<Work> work;
  for (const auto& a : alphas) {
    const auto nu = bound_stencil(eta, a, stencil);
    if (!nu) continue;
    const double weight =
        magnitude(falling_factorial(eta, a.as_point())) / static_cast<double>(a.factorial());
    if (weight == 0.0) continue;
    const MultiIndex total = a + omega;
    f.require(IntBox(xi + nu->lo(), xi + nu->hi() + total.as_point()), "remainder_bound");
    work.push_back({a, *nu, weight});
  }
  double bound = 0.0;
  for (const auto& w : work) {
    const MultiIndex total = w.alpha + omega;
    double peak = 0.0;
    w.nu.for_each([&](const LatticePoint& nu) {
      peak = std::max(peak, magnitude(forward_difference(f, total, xi + nu)));
    });
    bound += w.weight * peak;
  }
  return bound;
}

/// c_M = sum_{|alpha|=M} 1/alpha!.
double taylor_constant(int dim, int order);

// ---------------------------------------------------------------------------
// Smooth corollary
// ---------------------------------------------------------------------------

/// A smooth function on R^n. `derivative` is optional; without it partial
/// derivatives come from central finite differences of `value`.
struct SmoothFunction {
  int dim = 1;
  std::function<Complex(const RealPoint&)> value;
  std::function<Complex(const MultiIndex&, const RealPoint&)> derivative;
};

struct SmoothBoundOptions {
  int samples_per_axis = 17;
  double fd_step = 1e-2;
  int fd_accuracy = 6;
  /// Relative change between the coarse (every other sample) and the full
  /// sampling above which a resolution warning is emitted.
  double resolution_warning = 0.05;
};

struct SmoothBoundResult {
  double bound = 0.0;
  std::vector<std::string> warnings;
};

/// c_M * max over |alpha|=M and sampled nu in Q_R(theta) of
/// |theta^alpha d^{alpha+omega} p(xi+nu)|.
SmoothBoundResult smooth_taylor_remainder_bound(const SmoothFunction& p, const RealPoint& xi,
                                                const RealPoint& theta, int order, const MultiIndex& omega,
                                                const SmoothBoundOptions& options = {});

/// Classical remainder p(xi+theta) - sum_{|alpha|<M} theta^alpha d^alpha p(xi)/alpha!.
Complex smooth_taylor_remainder(const SmoothFunction& p, const RealPoint& xi, const RealPoint& theta, int order,
                                const SmoothBoundOptions& options = {});

/// d^alpha p(x), analytic when available, otherwise finite differences.
Complex smooth_derivative(const SmoothFunction& p, const MultiIndex& alpha, const RealPoint& x,
                          const SmoothBoundOptions& options = {});

/// Fornberg weights for the derivative of order `deriv` at 0 on the given nodes.
std::vector<double> fornberg_weights(int deriv, const std::vector<double>& nodes);

/// Central stencil offsets (in units of the step) for a derivative of the
/// given order at the given even accuracy.
std::vector<double> central_stencil(int deriv, int accuracy);

}  // namespace tpdo::diffcalc
