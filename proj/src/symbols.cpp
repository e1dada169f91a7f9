#include "tpdo/symbols.hpp"

#include <cmath>

#include "tpdo/diffcalc.hpp"

namespace tpdo {

double japanese_bracket(const RealPoint& xi) { return std::sqrt(1.0 + dot(xi, xi)); }

ToroidalSymbol::ToroidalSymbol(int dim, Rule rule, SymbolOrder order)
    : dim_(dim), rule_(std::move(rule)), order_(order) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("symbol dimension must lie in [1, 3]");
}

namespace {

// Grid node index of x, or OutOfDomain when x is not (close to) a node.
std::size_t node_of(const TorusGrid& grid, const RealPoint& x) {
  if (x.size() != grid.dim()) throw Mismatch("point and grid dimensions differ");
  const double h = grid.spacing();
  LatticePoint j(grid.dim());
  for (int i = 0; i < grid.dim(); ++i) {
    const double s = x[i] / h;
    const double r = std::round(s);
    if (std::abs(s - r) > 1e-8) throw OutOfDomain("tabulated symbol queried off the grid");
    j[i] = static_cast<int>(r);
  }
  return grid.linear_index(j);
}

}  // namespace

ToroidalSymbol ToroidalSymbol::from_table(SymbolTable table, SymbolOrder order) {
  if (table.values.size() != table.grid.size() * table.window.size()) {
    throw Mismatch("symbol table size does not match grid x window");
  }
  if (table.grid.dim() != table.window.dim()) throw Mismatch("symbol table grid and window dimensions differ");
  auto shared = std::make_shared<const SymbolTable>(table);
  ToroidalSymbol s(table.grid.dim(),
                   [shared](const RealPoint& x, const LatticePoint& xi) {
                     if (!shared->window.contains(xi)) {
                       throw OutOfDomain("tabulated symbol queried at xi = " + to_string(xi) + " outside its window");
                     }
                     return shared->at(node_of(shared->grid, x), shared->window.index(xi));
                   },
                   order);
  s.table_ = std::move(table);
  return s;
}

SymbolTable ToroidalSymbol::tabulate(const TorusGrid& grid, const FrequencyWindow& window) const {
  if (grid.dim() != dim_ || window.dim() != dim_) throw Mismatch("tabulation grid/window dimension mismatch");
  SymbolTable t{grid, window, std::vector<Complex>(grid.size() * window.size())};
  parallel_for(grid.size(), [&](std::size_t i) {
    const RealPoint x = grid.node(i);
    for (std::size_t k = 0; k < window.size(); ++k) t.values[i * window.size() + k] = rule_(x, window.frequency(k));
  });
  return t;
}

TorusAmplitude TorusAmplitude::from_symbol(const ToroidalSymbol& sigma) {
  return {sigma.dim(), [sigma](const RealPoint& x, const RealPoint&, const LatticePoint& xi) { return sigma(x, xi); },
          sigma.order()};
}

std::vector<ClassConstant> class_constants(const ToroidalSymbol& sigma, const MultiIndex& alpha_max,
                                           const MultiIndex& beta_max, const TorusGrid& grid,
                                           const FrequencyWindow& window) {
  const int n = sigma.dim();
  if (grid.dim() != n || window.dim() != n || alpha_max.size() != n || beta_max.size() != n) {
    throw Mismatch("class_constants: dimension mismatch");
  }
  // Samples of sigma(., eta) for every eta in window + alpha_max.
  const IntBox inflated(window.box().lo(), window.box().hi() + alpha_max.as_point());
  std::vector<GridFunction> columns(inflated.size());
  parallel_for(inflated.size(), [&](std::size_t k) {
    const LatticePoint eta = inflated.point(k);
    columns[k] = GridFunction::sample(grid, [&](const RealPoint& x) { return sigma(x, eta); });
  });

  const auto alphas = indices_below_or_equal(alpha_max);
  const auto betas = indices_below_or_equal(beta_max);
  const SymbolOrder& ord = sigma.order();
  std::vector<double> sup(alphas.size() * betas.size(), 0.0);
  for (std::size_t k = 0; k < window.size(); ++k) {
    const LatticePoint xi = window.frequency(k);
    const double bracket = japanese_bracket(xi);
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      const auto& alpha = alphas[ai];
      GridFunction diff(grid);
      for (const auto& beta : indices_below_or_equal(alpha)) {
        const double sign = ((alpha.order() - beta.order()) & 1) ? -1.0 : 1.0;
        diff += Complex(sign * binomial(alpha, beta)) * columns[inflated.linear_index(xi + beta.as_point())];
      }
      for (std::size_t bi = 0; bi < betas.size(); ++bi) {
        const auto& beta = betas[bi];
        const double weight =
            std::pow(bracket, -(ord.m - ord.rho * alpha.order() + ord.delta * beta.order()));
        const double peak = spectral_derivative(diff, beta).max_abs();
        auto& slot = sup[ai * betas.size() + bi];
        slot = std::max(slot, peak * weight);
      }
    }
  }
  std::vector<ClassConstant> out;
  for (std::size_t ai = 0; ai < alphas.size(); ++ai)
    for (std::size_t bi = 0; bi < betas.size(); ++bi)
      out.push_back({alphas[ai], betas[bi], sup[ai * betas.size() + bi]});
  return out;
}

// ---------------------------------------------------------------------------
// theta
// ---------------------------------------------------------------------------

namespace {

double smooth_step(double t, double c) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-c / t);
  const double b = std::exp(-c / (1.0 - t));
  return a / (a + b);
}

}  // namespace

ThetaFunction::ThetaFunction(double steepness, double step) : steepness_(steepness), step_(step) {
  if (!(steepness > 0.0)) throw InvalidArgument("theta steepness must be positive");
  const double count = kTwoPi / step;
  const auto half = static_cast<std::size_t>(std::llround(count));
  if (!(step > 0.0) || std::abs(count - static_cast<double>(half)) > 1e-9 || half < 8) {
    throw InvalidArgument("theta step must divide 2pi into at least 8 parts");
  }
  samples_.resize(half + 1);
  factor_.resize(half + 1);
  for (std::size_t j = 0; j <= half; ++j) {
    const double x = step * static_cast<double>(j);
    samples_[j] = (*this)(x);
    factor_[j] = samples_[j] == 0.0 ? Complex{} : phi_factor(x, 1);
  }
}

double ThetaFunction::operator()(double x) const { return 1.0 - smooth_step(std::abs(x) / kTwoPi, steepness_); }

double ThetaFunction::operator()(const RealPoint& x) const {
  double v = 1.0;
  for (double xi : x) v *= (*this)(xi);
  return v;
}

// theta is even, so the trapezoid sum over [-2pi, 2pi] folds onto [0, 2pi]
// with cosines; the endpoint samples vanish.
double ThetaFunction::transform(double xi) const {
  const Complex rot = std::polar(1.0, step_ * xi);
  Complex z = rot;
  double acc = 0.5 * samples_[0];
  for (std::size_t j = 1; j < samples_.size(); ++j) {
    acc += samples_[j] * z.real();
    z *= rot;
  }
  return 2.0 * acc * step_ / kTwoPi;
}

double ThetaFunction::transform(const RealPoint& xi) const {
  double v = 1.0;
  for (double x : xi) v *= transform(x);
  return v;
}

// g(-x) = conj(g(x)) for g = factor^k theta, so the sum is again a real
// cosine-type sum over the non-negative half.
Complex ThetaFunction::phi(int k, double xi) const {
  if (k < 0) throw InvalidArgument("phi order must be non-negative");
  if (k == 0) return transform(xi);
  const Complex rot = std::polar(1.0, -step_ * xi);
  Complex z = rot;
  double acc = 0.5 * samples_[0];
  for (std::size_t j = 1; j < samples_.size(); ++j) {
    if (samples_[j] != 0.0) acc += (std::pow(factor_[j], k) * samples_[j] * z).real();
    z *= rot;
  }
  return 2.0 * acc * step_ / kTwoPi;
}

ThetaFunction build_theta(double steepness) { return ThetaFunction(steepness); }

Complex phi_factor(double x, int k) {
  Complex base;
  if (std::abs(x) < 1e-3) {
    // z / (e^z - 1) with z = ix
    const Complex z(0.0, x);
    base = 1.0 - z / 2.0 + z * z / 12.0 - z * z * z * z / 720.0;
  } else {
    base = Complex(0.0, -x) / (1.0 - std::polar(1.0, x));
  }
  return std::pow(base, k);
}

Complex phi_alpha(const ThetaFunction& theta, const MultiIndex& alpha, const RealPoint& xi) {
  if (alpha.size() != xi.size()) throw Mismatch("phi_alpha: dimension mismatch");
  Complex v = 1.0;
  for (int j = 0; j < xi.size(); ++j) v *= theta.phi(alpha[j], xi[j]);
  return v;
}

// ---------------------------------------------------------------------------
// Extension
// ---------------------------------------------------------------------------

ExtendedSymbol::ExtendedSymbol(ToroidalSymbol sigma, ThetaFunction theta, int radius)
    : sigma_(std::move(sigma)), theta_(std::move(theta)), radius_(radius) {
  if (radius < 0) throw InvalidArgument("extension radius must be non-negative");
}

Complex ExtendedSymbol::operator()(const RealPoint& x, const RealPoint& xi) const {
  const int n = dim();
  if (xi.size() != n) throw Mismatch("extended symbol: dimension mismatch");
  LatticePoint centre(n);
  std::vector<std::vector<double>> weights(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    centre[j] = static_cast<int>(std::lround(xi[j]));
    auto& w = weights[static_cast<std::size_t>(j)];
    for (int k = -radius_; k <= radius_; ++k) w.push_back(theta_.transform(xi[j] - (centre[j] + k)));
  }
  Complex acc = 0.0;
  IntBox::cube(n, -radius_, radius_).for_each([&](const LatticePoint& k) {
    double w = 1.0;
    for (int j = 0; j < n; ++j) w *= weights[static_cast<std::size_t>(j)][static_cast<std::size_t>(k[j] + radius_)];
    acc += w * sigma_(x, centre + k);
  });
  return acc;
}

double ExtendedSymbol::tail() const { return extension_tail(theta_, dim(), radius_); }

namespace {

// |theta^(f + k)| for fractional offsets f in [-1/2, 1/2) and |k| <= reach.
struct TailTable {
  static constexpr int kOffsets = 16;
  int reach;
  std::vector<std::vector<double>> values;  // [offset][k + reach]

  TailTable(const ThetaFunction& theta, int reach_) : reach(reach_) {
    for (int o = 0; o < kOffsets; ++o) {
      const double f = -0.5 + static_cast<double>(o) / kOffsets;
      std::vector<double> row;
      for (int k = -reach; k <= reach; ++k) row.push_back(std::abs(theta.transform(f + k)));
      values.push_back(std::move(row));
    }
  }

  double tail(int dim, int radius) const {
    double worst_outside = 0.0;
    double worst_total = 0.0;
    for (const auto& row : values) {
      double total = 0.0, inside = 0.0;
      for (int k = -reach; k <= reach; ++k) {
        const double v = row[static_cast<std::size_t>(k + reach)];
        total += v;
        if (std::abs(k) <= radius) inside += v;
      }
      worst_outside = std::max(worst_outside, total - inside);
      worst_total = std::max(worst_total, total);
    }
    // (I + o)^n - I^n <= n o T^{n-1}
    return dim * worst_outside * std::pow(worst_total, dim - 1);
  }
};

constexpr int kTailReach = 200;

}  // namespace

double extension_tail(const ThetaFunction& theta, int dim, int radius) {
  return TailTable(theta, std::max(kTailReach, radius + 50)).tail(dim, radius);
}

int extension_radius(const ThetaFunction& theta, int dim, double tolerance, int max_radius) {
  const TailTable table(theta, std::max(kTailReach, max_radius + 50));
  for (int r = 0; r <= max_radius; ++r)
    if (table.tail(dim, r) <= tolerance) return r;
  throw InvalidArgument("no extension radius up to " + std::to_string(max_radius) + " meets tolerance " +
                        std::to_string(tolerance));
}

ExtendedSymbol extend_symbol(const ToroidalSymbol& sigma, const ThetaFunction& theta, int radius) {
  return {sigma, theta, radius};
}

}  // namespace tpdo
