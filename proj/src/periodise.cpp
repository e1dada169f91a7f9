#include "tpdo/periodise.hpp"

#include <cmath>

#include "tpdo/quantize.hpp"

namespace tpdo {

namespace {

constexpr double kAlignTol = 1e-9;

bool near_integer(double v) { return std::abs(v - std::round(v)) < kAlignTol * std::max(1.0, std::abs(v)); }

// 6-point Lagrange weights at offset s in [0, 1) for nodes -2 .. 3.
std::array<double, 6> quintic_weights(double s) {
  std::array<double, 6> w{};
  for (int i = 0; i < 6; ++i) {
    double p = 1.0;
    for (int k = 0; k < 6; ++k)
      if (k != i) p *= (s - (k - 2)) / static_cast<double>(i - k);
    w[static_cast<std::size_t>(i)] = p;
  }
  return w;
}

// Range of k with lo <= x + 2 pi k <= hi.
std::pair<int, int> image_range(double x, double lo, double hi) {
  return {static_cast<int>(std::ceil((lo - x) / kTwoPi - 1e-12)), static_cast<int>(std::floor((hi - x) / kTwoPi + 1e-12))};
}

// Applies mat (out x in, row-major) along `axis` of a row-major tensor.
std::vector<Complex> transform_axis(const std::vector<Complex>& data, std::vector<int>& shape, int axis,
                                    const std::vector<Complex>& mat, int out_len) {
  const int in_len = shape[static_cast<std::size_t>(axis)];
  std::size_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= static_cast<std::size_t>(shape[static_cast<std::size_t>(d)]);
  for (std::size_t d = static_cast<std::size_t>(axis) + 1; d < shape.size(); ++d) inner *= static_cast<std::size_t>(shape[d]);
  std::vector<Complex> out(outer * static_cast<std::size_t>(out_len) * inner);
  for (std::size_t a = 0; a < outer; ++a)
    for (int o = 0; o < out_len; ++o)
      for (int i = 0; i < in_len; ++i) {
        const Complex m = mat[static_cast<std::size_t>(o) * static_cast<std::size_t>(in_len) + static_cast<std::size_t>(i)];
        if (m == Complex{}) continue;
        const Complex* src = &data[(a * static_cast<std::size_t>(in_len) + static_cast<std::size_t>(i)) * inner];
        Complex* dst = &out[(a * static_cast<std::size_t>(out_len) + static_cast<std::size_t>(o)) * inner];
        for (std::size_t b = 0; b < inner; ++b) dst[b] += m * src[b];
      }
  shape[static_cast<std::size_t>(axis)] = out_len;
  return out;
}

void require_inside_cube(const RealBox& box, const char* what) {
  for (int j = 0; j < box.dim(); ++j)
    if (box.lo[j] < -kPi - 1e-12 || box.hi[j] > kPi + 1e-12)
      throw InvalidArgument(std::string(what) + " must be supported in [-pi, pi]^n");
}

std::size_t image_count(const RealBox& box) {
  std::size_t c = 1;
  for (int j = 0; j < box.dim(); ++j) c *= static_cast<std::size_t>(std::ceil((box.hi[j] - box.lo[j]) / kTwoPi)) + 1;
  return c;
}

double max_diff(const GridFunction& a, const GridFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// sum over frequencies outside the window, or on its outermost shell, of
// |(pf)^(xi)| max_x |a(x, xi)|.
double window_truncation(const ToroidalSymbol& a, const GridFunction& pf, const FrequencyWindow& window) {
  const TorusGrid& grid = pf.grid();
  const auto bins = grid_spectrum(pf);
  const FrequencyWindow full = FrequencyWindow::full(grid);
  const int k = window.cutoff();
  double total = 0.0;
  for (std::size_t b = 0; b < full.size(); ++b) {
    const LatticePoint xi = full.frequency(b);
    bool edge = !window.contains(xi);
    for (int j = 0; j < xi.size() && !edge; ++j) edge = xi[j] == -k || xi[j] == window.box().hi()[j];
    if (!edge) continue;
    std::size_t bin = 0;
    for (int j = 0; j < xi.size(); ++j)
      bin = bin * static_cast<std::size_t>(grid.points()) + static_cast<std::size_t>(fft_bin(xi[j], grid.points()));
    const double c = std::abs(bins[bin]);
    if (c == 0.0) continue;
    double amax = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) amax = std::max(amax, std::abs(a(grid.node(i), xi)));
    total += c * amax;
  }
  return total;
}

RealBox grown(const RealBox& box, double margin) {
  RealBox b = box;
  for (int j = 0; j < b.dim(); ++j) {
    b.lo[j] -= margin;
    b.hi[j] += margin;
  }
  return b;
}

constexpr double kRoundoff = 1e-12;

}  // namespace

RealBox aligned_box(const RealBox& box, double h) {
  if (!(h > 0.0)) throw InvalidArgument("sample spacing must be positive");
  RealBox b = box;
  for (int j = 0; j < box.dim(); ++j) {
    if (!(box.hi[j] >= box.lo[j])) throw InvalidArgument("box bounds out of order");
    const double lo = box.lo[j] / h, hi = box.hi[j] / h;
    b.lo[j] = (near_integer(lo) ? std::round(lo) : std::floor(lo)) * h;
    b.hi[j] = (near_integer(hi) ? std::round(hi) : std::ceil(hi)) * h;
  }
  return b;
}

CompactFunction::CompactFunction(const RealBox& box, double h) : box_(box), h_(h), counts_(box.dim()) {
  if (box.lo.size() != box.hi.size() || box.dim() < 1) throw InvalidArgument("malformed box");
  if (!(h > 0.0)) throw InvalidArgument("sample spacing must be positive");
  std::size_t total = 1;
  for (int j = 0; j < box.dim(); ++j) {
    const double steps = (box.hi[j] - box.lo[j]) / h;
    if (!std::isfinite(steps) || steps < 0.0 || !near_integer(steps))
      throw InvalidArgument("box sides must be finite multiples of the spacing");
    counts_[j] = static_cast<int>(std::round(steps)) + 1;
    total *= static_cast<std::size_t>(counts_[j]);
  }
  values_.assign(total, Complex{});
}

CompactFunction::CompactFunction(RealBox box, double h, std::vector<Complex> values, bool check_boundary)
    : CompactFunction(box, h) {
  if (values.size() != values_.size()) throw Mismatch("sample count does not match the box");
  values_ = std::move(values);
  if (check_boundary && boundary_max() > 1e-12) throw InvalidArgument("values must vanish on the box boundary");
}

LatticePoint CompactFunction::sample_index(std::size_t linear) const {
  LatticePoint m(dim());
  for (int j = dim() - 1; j >= 0; --j) {
    m[j] = static_cast<int>(linear % static_cast<std::size_t>(counts_[j]));
    linear /= static_cast<std::size_t>(counts_[j]);
  }
  return m;
}

RealPoint CompactFunction::node(std::size_t linear) const {
  const LatticePoint m = sample_index(linear);
  RealPoint x(dim());
  for (int j = 0; j < dim(); ++j) x[j] = box_.lo[j] + m[j] * h_;
  return x;
}

Complex CompactFunction::operator()(const RealPoint& x) const {
  const int n = dim();
  std::array<int, kMaxDim> base{};
  std::array<std::array<double, 6>, kMaxDim> w{};
  for (int j = 0; j < n; ++j) {
    double t = (x[j] - box_.lo[j]) / h_;
    if (std::abs(t - std::round(t)) < 1e-9) t = std::round(t);
    if (t < -1e-9 || t > counts_[j] - 1 + 1e-9) return {};
    const double m0 = std::floor(t);
    base[static_cast<std::size_t>(j)] = static_cast<int>(m0) - 2;
    w[static_cast<std::size_t>(j)] = quintic_weights(t - m0);
  }
  Complex sum{};
  int stencil = 1;
  for (int j = 0; j < n; ++j) stencil *= 6;
  for (int s = 0; s < stencil; ++s) {
    int rest = s;
    double weight = 1.0;
    std::size_t linear = 0;
    bool inside = true;
    for (int j = n - 1; j >= 0; --j) {
      const int o = rest % 6;
      rest /= 6;
      const int m = base[static_cast<std::size_t>(j)] + o;
      if (m < 0 || m >= counts_[j]) inside = false;
      weight *= w[static_cast<std::size_t>(j)][static_cast<std::size_t>(o)];
    }
    if (!inside || weight == 0.0) continue;
    rest = s;
    std::size_t stride = 1;
    for (int j = n - 1; j >= 0; --j) {
      const int o = rest % 6;
      rest /= 6;
      linear += static_cast<std::size_t>(base[static_cast<std::size_t>(j)] + o) * stride;
      stride *= static_cast<std::size_t>(counts_[j]);
    }
    sum += weight * values_[linear];
  }
  return sum;
}

double CompactFunction::l1_norm() const {
  double s = 0.0;
  for (const auto& v : values_) s += std::abs(v);
  return s * std::pow(h_, dim());
}

double CompactFunction::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

double CompactFunction::boundary_max() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const LatticePoint k = sample_index(i);
    bool edge = false;
    for (int j = 0; j < dim(); ++j) edge = edge || k[j] == 0 || k[j] == counts_[j] - 1;
    if (edge) m = std::max(m, std::abs(values_[i]));
  }
  return m;
}

Complex euclidean_transform(const CompactFunction& u, const RealPoint& xi) {
  Complex s{};
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] != Complex{}) s += u[i] * std::polar(1.0, -dot(u.node(i), xi));
  return s * std::pow(u.spacing() / kTwoPi, u.dim());
}

GridFunction periodise_function(const CompactFunction& u, const TorusGrid& grid, const PeriodiseOptions& options) {
  if (u.dim() != grid.dim()) throw Mismatch("dimension of u and grid differ");
  const double ratio = grid.spacing() / u.spacing();
  bool aligned = near_integer(ratio) && std::round(ratio) >= 1.0;
  for (int j = 0; j < u.dim() && aligned; ++j) aligned = near_integer(u.box().lo[j] / u.spacing());

  GridFunction pu(grid);
  if (aligned) {
    const long long r = std::llround(ratio);
    const long long period = r * grid.points();
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (u[i] == Complex{}) continue;
      const LatticePoint m = u.sample_index(i);
      LatticePoint node(u.dim());
      bool on_grid = true;
      for (int j = 0; j < u.dim() && on_grid; ++j) {
        const long long g = std::llround(u.box().lo[j] / u.spacing()) + m[j];
        const long long t = ((g % period) + period) % period;
        on_grid = t % r == 0;
        node[j] = static_cast<int>(t / r);
      }
      if (on_grid) pu[grid.linear_index(node)] += u[i];
    }
    return pu;
  }
  if (!options.interpolate) throw Mismatch("torus nodes are not sample points of u; enable interpolation");
  parallel_for(grid.size(), [&](std::size_t i) {
    const RealPoint x = grid.node(i);
    LatticePoint lo(u.dim()), hi(u.dim());
    for (int j = 0; j < u.dim(); ++j) std::tie(lo[j], hi[j]) = image_range(x[j], u.box().lo[j], u.box().hi[j]);
    for (int j = 0; j < u.dim(); ++j)
      if (hi[j] < lo[j]) return;
    Complex s{};
    IntBox(lo, hi).for_each([&](const LatticePoint& k) {
      RealPoint y = x;
      for (int j = 0; j < u.dim(); ++j) y[j] += kTwoPi * k[j];
      s += u(y);
    });
    pu[i] = s;
  });
  return pu;
}

double l1_norm_torus(const GridFunction& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f[i]);
  return s * std::pow(f.grid().spacing(), f.grid().dim());
}

Complex lattice_sum(const CompactSymbol& a, const RealPoint& x, const RealPoint& xi) {
  const int n = a.dim;
  LatticePoint lo(n), hi(n);
  for (int j = 0; j < n; ++j) {
    std::tie(lo[j], hi[j]) = image_range(x[j], a.support.lo[j], a.support.hi[j]);
    if (hi[j] < lo[j]) return {};
  }
  Complex s{};
  IntBox(lo, hi).for_each([&](const LatticePoint& k) {
    RealPoint y = x;
    for (int j = 0; j < n; ++j) y[j] += kTwoPi * k[j];
    s += a.rule(y, xi);
  });
  return s;
}

EuclideanSymbol periodised_symbol(const CompactSymbol& a) {
  return [a](const RealPoint& x, const RealPoint& xi) { return lattice_sum(a, x, xi); };
}

ToroidalSymbol periodise_symbol(const CompactSymbol& a, const FrequencyWindow& window) {
  if (window.dim() != a.dim) throw Mismatch("window dimension differs from the symbol");
  return {a.dim,
          [a, window](const RealPoint& x, const LatticePoint& xi) {
            if (!window.contains(xi)) throw OutOfDomain("frequency " + to_string(xi) + " outside the window");
            return lattice_sum(a, x, to_real(xi));
          },
          a.order};
}

ToroidalSymbol restrict_symbol(const EuclideanSymbol& a, int dim, SymbolOrder order) {
  return {dim, [a](const RealPoint& x, const LatticePoint& xi) { return a(x, to_real(xi)); }, order};
}

ToroidalSymbol split_and_periodise(const EuclideanSymbol& a1, const CompactSymbol& a0, const FrequencyWindow& window) {
  const ToroidalSymbol p0 = periodise_symbol(a0, window);
  SymbolOrder order = a0.order;
  return {a0.dim, [a1, p0](const RealPoint& x, const LatticePoint& xi) { return a1(x, to_real(xi)) + p0(x, xi); },
          order};
}

EuclideanResult apply_euclidean_op(const EuclideanSymbol& a, const CompactFunction& f, const RealBox& output,
                                   const EuclideanQuadrature& quadrature, double tolerance) {
  if (!(quadrature.step > 0.0) || !(quadrature.cutoff > 0.0)) throw InvalidArgument("quadrature needs positive step and cutoff");
  const int n = f.dim();
  int steps = static_cast<int>(std::ceil(quadrature.cutoff / quadrature.step - 1e-9));
  if (steps % 2 != 0) ++steps;
  const int len = 2 * steps + 1;
  const double reach = steps * quadrature.step;
  const double tail_from = 0.75 * reach;

  // f^_E on the frequency tensor grid, one axis at a time.
  std::vector<Complex> data = f.values();
  std::vector<int> shape(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) shape[static_cast<std::size_t>(j)] = f.count(j);
  for (int j = 0; j < n; ++j) {
    const int in = f.count(j);
    std::vector<Complex> mat(static_cast<std::size_t>(len) * static_cast<std::size_t>(in));
    for (int o = 0; o < len; ++o)
      for (int i = 0; i < in; ++i)
        mat[static_cast<std::size_t>(o * in + i)] =
            std::polar(f.spacing() / kTwoPi, -(f.box().lo[j] + i * f.spacing()) * (o - steps) * quadrature.step);
    data = transform_axis(data, shape, j, mat, len);
  }

  struct Node {
    RealPoint xi;
    Complex fhat;
    double fine, coarse;
    bool tail;
  };
  std::vector<Node> nodes;
  nodes.reserve(data.size());
  for (std::size_t q = 0; q < data.size(); ++q) {
    if (data[q] == Complex{}) continue;
    std::size_t rest = q;
    RealPoint xi(n);
    double fine = 1.0, coarse = 1.0;
    bool tail = false;
    for (int j = n - 1; j >= 0; --j) {
      const int m = static_cast<int>(rest % static_cast<std::size_t>(len)) - steps;
      rest /= static_cast<std::size_t>(len);
      xi[j] = m * quadrature.step;
      const double edge = std::abs(m) == steps ? 0.5 : 1.0;
      fine *= edge * quadrature.step;
      coarse *= m % 2 == 0 ? edge * 2.0 * quadrature.step : 0.0;
      tail = tail || std::abs(xi[j]) > tail_from;
    }
    nodes.push_back({xi, data[q], fine, coarse, tail});
  }

  const RealBox box = aligned_box(output, f.spacing());
  CompactFunction shape_out = CompactFunction::sample([](const RealPoint&) { return Complex{}; }, box, f.spacing(), false);
  std::vector<Complex> values(shape_out.size());
  std::vector<double> indicator(shape_out.size());
  parallel_for(values.size(), [&](std::size_t i) {
    const RealPoint x = shape_out.node(i);
    Complex fine{}, coarse{}, tail{};
    for (const auto& nd : nodes) {
      const Complex term = std::polar(1.0, dot(x, nd.xi)) * a(x, nd.xi) * nd.fhat;
      fine += nd.fine * term;
      coarse += nd.coarse * term;
      if (nd.tail) tail += nd.fine * term;
    }
    values[i] = fine;
    indicator[i] = std::abs(fine - coarse) + std::abs(tail);
  });
  EuclideanResult r;
  r.value = CompactFunction(box, f.spacing(), std::move(values), false);
  for (double v : indicator) r.error_indicator = std::max(r.error_indicator, v);
  r.flagged = r.error_indicator > tolerance;
  return r;
}

CommutationReport verify_p1(const EuclideanSymbol& a, const CompactFunction& f, const TorusGrid& grid,
                            const FrequencyWindow& window, const CommutationOptions& options) {
  const RealBox out = grown(f.box(), options.margin);
  const EuclideanResult e = apply_euclidean_op(a, f, out, options.quadrature);
  const GridFunction left = periodise_function(e.value, grid);
  const GridFunction pf = periodise_function(f, grid);
  const ToroidalSymbol at = restrict_symbol(a, f.dim());
  const GridFunction right = apply_symbol_op(at, pf, window);

  const double images = static_cast<double>(image_count(e.value.box()));
  CommutationReport r;
  r.discrepancy = max_diff(left, right);
  r.quadrature_part = e.error_indicator * images;
  r.truncation_part = e.value.boundary_max() * images + window_truncation(at, pf, window);
  r.budget = r.quadrature_part + r.truncation_part + kRoundoff * images * std::max(1.0, right.max_abs());
  r.pass = r.discrepancy <= r.budget;
  return r;
}

ResidualReport smoothing_residual(const CompactSymbol& a0, const CompactFunction& f, const RealBox& output,
                                  const EuclideanQuadrature& quadrature) {
  require_inside_cube(a0.support, "the symbol");
  {
    // the support of f is where it is non-zero, which may be smaller than its box
    RealBox s = f.box();
    for (int j = 0; j < f.dim(); ++j) {
      s.lo[j] = std::numeric_limits<double>::infinity();
      s.hi[j] = -std::numeric_limits<double>::infinity();
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (std::abs(f[i]) <= 1e-12) continue;
      const RealPoint x = f.node(i);
      for (int j = 0; j < f.dim(); ++j) {
        s.lo[j] = std::min(s.lo[j], x[j]);
        s.hi[j] = std::max(s.hi[j], x[j]);
      }
    }
    if (std::isfinite(s.lo[0])) require_inside_cube(s, "f");
  }
  const EuclideanResult direct = apply_euclidean_op(a0.rule, f, output, quadrature);
  const EuclideanResult periodic = apply_euclidean_op(periodised_symbol(a0), f, output, quadrature);
  std::vector<Complex> diff(direct.value.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = direct.value[i] - periodic.value[i];

  ResidualReport r;
  r.residual = CompactFunction(direct.value.box(), f.spacing(), std::move(diff), false);
  r.error_indicator = direct.error_indicator + periodic.error_indicator;
  for (std::size_t i = 0; i < r.residual.size(); ++i) {
    const RealPoint x = r.residual.node(i);
    double norm = 0.0;
    for (int j = 0; j < x.size(); ++j) norm = std::max(norm, std::abs(x[j]));
    const double v = std::abs(r.residual[i]);
    r.max_abs = std::max(r.max_abs, v);
    if (norm <= kPi + 1e-12) r.inside_max = std::max(r.inside_max, v);
    if (norm >= kTwoPi - 1e-9) r.beyond_two_pi = std::max(r.beyond_two_pi, v);
  }
  return r;
}

SplitReport verify_split(const EuclideanSymbol& a1, const CompactSymbol& a0, const CompactFunction& f,
                         const TorusGrid& grid, const FrequencyWindow& window, const CommutationOptions& options) {
  const RealBox out = grown(f.box(), options.margin);
  const EuclideanSymbol a = [a1, a0](const RealPoint& x, const RealPoint& xi) { return a1(x, xi) + a0.rule(x, xi); };
  const EuclideanResult e = apply_euclidean_op(a, f, out, options.quadrature);
  const ResidualReport rf = smoothing_residual(a0, f, out, options.quadrature);
  const GridFunction left = periodise_function(e.value, grid);
  const GridFunction prf = periodise_function(rf.residual, grid);
  const GridFunction pf = periodise_function(f, grid);
  const ToroidalSymbol b = split_and_periodise(a1, a0, window);
  const GridFunction right = apply_symbol_op(b, pf, window);

  const double images = static_cast<double>(image_count(e.value.box()));
  SplitReport r;
  r.discrepancy = max_diff(left, right);
  r.residual = prf.max_abs();
  r.corrected = max_diff(left - prf, right);
  r.budget = (e.error_indicator + rf.error_indicator) * images +
             (e.value.boundary_max() + rf.residual.boundary_max()) * images + window_truncation(b, pf, window) +
             kRoundoff * images * std::max(1.0, right.max_abs());
  r.pass = r.corrected <= r.budget;
  return r;
}

CompactFunction compact_lift(const GridFunction& g, int refine, const ThetaFunction& theta) {
  if (refine < 1) throw InvalidArgument("refine must be >= 1");
  const TorusGrid& grid = g.grid();
  const int n = grid.dim(), N = grid.points();
  const auto bins = grid_spectrum(g);
  RealBox box{RealPoint(n, -kTwoPi), RealPoint(n, kTwoPi)};
  const double h = kTwoPi / (N * refine);
  return CompactFunction::sample(
      [&](const RealPoint& x) {
        const double cut = theta(x);
        if (cut == 0.0) return Complex{};
        Complex s{};
        for (std::size_t b = 0; b < bins.size(); ++b) {
          if (bins[b] == Complex{}) continue;
          std::size_t rest = b;
          Complex factor = 1.0;
          for (int j = n - 1; j >= 0; --j) {
            const int bin = static_cast<int>(rest % static_cast<std::size_t>(N));
            rest /= static_cast<std::size_t>(N);
            if (bin == N / 2)
              factor *= std::cos(x[j] * bin);
            else
              factor *= std::polar(1.0, x[j] * signed_frequency(bin, N));
          }
          s += bins[b] * factor;
        }
        return cut * s;
      },
      box, h);
}

}  // namespace tpdo
