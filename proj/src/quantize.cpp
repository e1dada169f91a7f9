#include "tpdo/quantize.hpp"

#include <cmath>
#include <map>
#include <random>

#include "tpdo/diffcalc.hpp"

namespace tpdo {

GridFunction apply_symbol_op(const ToroidalSymbol& sigma, const GridFunction& f, const FrequencyWindow& window) {
  const auto& grid = f.grid();
  if (sigma.dim() != grid.dim()) throw Mismatch("symbol and grid dimensions differ");
  const SpectralFunction fh = forward_transform(f, window);
  GridFunction out(grid);
  parallel_for(grid.size(), [&](std::size_t i) {
    const LatticePoint j = grid.node_index(i);
    const RealPoint x = grid.node(i);
    Complex acc = 0.0;
    for (std::size_t k = 0; k < window.size(); ++k) {
      const Complex c = fh.coeffs()[k];
      if (c == Complex{}) continue;
      const LatticePoint xi = window.frequency(k);
      acc += sigma(x, xi) * c * node_phase(grid, j, xi);
    }
    out[i] = acc;
  });
  return out;
}

namespace {

GridFunction exponential(const TorusGrid& grid, const LatticePoint& xi) {
  GridFunction e(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) e[i] = node_phase(grid, grid.node_index(i), xi);
  return e;
}

}  // namespace

ToroidalSymbol symbol_of_operator(const LinearOperator& op, const TorusGrid& grid, const FrequencyWindow& window) {
  window.check_fits(grid);
  SymbolTable table{grid, window, std::vector<Complex>(grid.size() * window.size())};
  for (std::size_t k = 0; k < window.size(); ++k) {
    const LatticePoint xi = window.frequency(k);
    const GridFunction image = op(exponential(grid, xi));
    if (!(image.grid() == grid)) throw Mismatch("operator changed the grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      table.values[i * window.size() + k] = image[i] * std::conj(node_phase(grid, grid.node_index(i), xi));
    }
  }
  return ToroidalSymbol::from_table(std::move(table));
}

GridFunction apply_amplitude_op(const TorusAmplitude& a, const GridFunction& f, const FrequencyWindow& window) {
  const auto& grid = f.grid();
  if (a.dim() != grid.dim()) throw Mismatch("amplitude and grid dimensions differ");
  window.check_fits(grid);
  const double scale = 1.0 / static_cast<double>(grid.size());
  GridFunction out(grid);
  parallel_for(grid.size(), [&](std::size_t i) {
    const LatticePoint jx = grid.node_index(i);
    const RealPoint x = grid.node(i);
    Complex acc = 0.0;
    for (std::size_t k = 0; k < window.size(); ++k) {
      const LatticePoint xi = window.frequency(k);
      Complex inner = 0.0;
      for (std::size_t l = 0; l < grid.size(); ++l) {
        if (f[l] == Complex{}) continue;
        inner += std::conj(node_phase(grid, grid.node_index(l), xi)) * a(x, grid.node(l), xi) * f[l];
      }
      acc += node_phase(grid, jx, xi) * inner * scale;
    }
    out[i] = acc;
  });
  return out;
}

TorusAmplitude build_a_alpha(const TorusAmplitude& a, const MultiIndex& alpha) {
  if (alpha.size() != a.dim()) throw Mismatch("build_a_alpha: dimension mismatch");
  return {a.dim(),
          [a, alpha](const RealPoint& x, const RealPoint& y, const LatticePoint& xi) {
            Complex factor = 1.0;
            for (int j = 0; j < alpha.size(); ++j) {
              if (alpha[j] == 0) continue;
              factor *= std::pow(std::polar(1.0, y[j] - x[j]) - 1.0, alpha[j]);
            }
            return factor == Complex{} ? Complex{} : factor * a(x, y, xi);
          },
          a.order()};
}

TorusAmplitude difference_in_xi(const TorusAmplitude& a, const MultiIndex& alpha) {
  if (alpha.size() != a.dim()) throw Mismatch("difference_in_xi: dimension mismatch");
  const auto betas = indices_below_or_equal(alpha);
  return {a.dim(),
          [a, alpha, betas](const RealPoint& x, const RealPoint& y, const LatticePoint& xi) {
            Complex acc = 0.0;
            for (const auto& beta : betas) {
              const double sign = ((alpha.order() - beta.order()) & 1) ? -1.0 : 1.0;
              acc += sign * binomial(alpha, beta) * a(x, y, xi + beta.as_point());
            }
            return acc;
          },
          a.order()};
}

ToroidalSymbol amplitude_to_symbol(const TorusAmplitude& a, int order, const TorusGrid& grid) {
  if (order < 1) throw InvalidArgument("amplitude_to_symbol: order must be >= 1");
  if (a.dim() != grid.dim()) throw Mismatch("amplitude and grid dimensions differ");
  const int n = a.dim();
  const auto alphas = indices_of_order_below(n, order);
  // Falling factorials q^(alpha) for every grid frequency q, per alpha.
  std::vector<std::vector<double>> weights(alphas.size(), std::vector<double>(grid.size()));
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    for (std::size_t b = 0; b < grid.size(); ++b) {
      const LatticePoint bin = grid.node_index(b);
      double w = 1.0;
      for (int j = 0; j < n; ++j) w *= diffcalc::falling_factorial(signed_frequency(bin[j], grid.points()), alphas[ai][j]);
      weights[ai][b] = w / static_cast<double>(alphas[ai].factorial());
    }
  }
  return {n,
          [a, grid, alphas, weights](const RealPoint& x, const LatticePoint& xi) {
            // y-spectra of a(x, ., xi + beta), computed once per shift.
            std::map<LatticePoint, std::vector<Complex>> spectra;
            auto spectrum = [&](const LatticePoint& beta) -> const std::vector<Complex>& {
              auto it = spectra.find(beta);
              if (it != spectra.end()) return it->second;
              const LatticePoint eta = xi + beta;
              auto g = GridFunction::sample(grid, [&](const RealPoint& y) { return a(x, y, eta); });
              return spectra.emplace(beta, grid_spectrum(g)).first->second;
            };
            std::vector<Complex> phase(grid.size());
            for (std::size_t b = 0; b < grid.size(); ++b) {
              const LatticePoint bin = grid.node_index(b);
              double s = 0.0;
              for (int j = 0; j < x.size(); ++j) s += x[j] * signed_frequency(bin[j], grid.points());
              phase[b] = std::polar(1.0, s);
            }
            Complex total = 0.0;
            for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
              const auto& alpha = alphas[ai];
              for (const auto& beta : indices_below_or_equal(alpha)) {
                const double sign = ((alpha.order() - beta.order()) & 1) ? -1.0 : 1.0;
                const double c = sign * binomial(alpha, beta);
                const auto& sp = spectrum(beta.as_point());
                Complex term = 0.0;
                for (std::size_t b = 0; b < grid.size(); ++b) {
                  if (weights[ai][b] != 0.0) term += weights[ai][b] * phase[b] * sp[b];
                }
                total += c * term;
              }
            }
            return total;
          },
          a.order()};
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

std::vector<Complex> OperatorMatrix::apply(const std::vector<Complex>& v) const {
  if (v.size() != col_count()) throw Mismatch("matrix/vector size mismatch");
  std::vector<Complex> out(row_count(), Complex{});
  for (std::size_t r = 0; r < row_count(); ++r) {
    Complex acc = 0.0;
    const Complex* row = entries.data() + r * col_count();
    for (std::size_t c = 0; c < col_count(); ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

std::vector<Complex> OperatorMatrix::apply_adjoint(const std::vector<Complex>& v) const {
  if (v.size() != row_count()) throw Mismatch("matrix/vector size mismatch");
  std::vector<Complex> out(col_count(), Complex{});
  for (std::size_t r = 0; r < row_count(); ++r) {
    const Complex* row = entries.data() + r * col_count();
    for (std::size_t c = 0; c < col_count(); ++c) out[c] += std::conj(row[c]) * v[r];
  }
  return out;
}

SpectralFunction OperatorMatrix::apply(const SpectralFunction& f) const {
  if (!(f.window() == cols)) throw Mismatch("spectral function window does not match the matrix columns");
  const std::vector<Complex> in(f.coeffs().begin(), f.coeffs().end());
  return {rows, apply(in)};
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (!(a.cols == b.rows)) throw Mismatch("matrix product: inner windows differ");
  OperatorMatrix out(a.rows, b.cols);
  parallel_for(a.row_count(), [&](std::size_t r) {
    for (std::size_t k = 0; k < a.col_count(); ++k) {
      const Complex v = a(r, k);
      if (v == Complex{}) continue;
      for (std::size_t c = 0; c < b.col_count(); ++c) out(r, c) += v * b(k, c);
    }
  });
  return out;
}

double max_abs_difference(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (!(a.rows == b.rows) || !(a.cols == b.cols)) throw Mismatch("matrices have different windows");
  double d = 0.0;
  for (std::size_t i = 0; i < a.entries.size(); ++i) d = std::max(d, std::abs(a.entries[i] - b.entries[i]));
  return d;
}

namespace {

// Fills column k of the matrix with the rows-window coefficients of `image`.
void fill_column(OperatorMatrix& m, std::size_t k, const GridFunction& image) {
  const auto bins = grid_spectrum(image);
  const auto& grid = image.grid();
  for (std::size_t r = 0; r < m.row_count(); ++r) {
    const LatticePoint omega = m.rows.frequency(r);
    std::size_t idx = 0;
    for (int i = 0; i < grid.dim(); ++i)
      idx = idx * static_cast<std::size_t>(grid.points()) + static_cast<std::size_t>(fft_bin(omega[i], grid.points()));
    m(r, k) = bins[idx];
  }
}

void check_matrix_size(const FrequencyWindow& rows, const FrequencyWindow& cols) {
  if (static_cast<double>(rows.size()) * static_cast<double>(cols.size()) > 4e6) {
    throw InvalidArgument("dense operator matrix would exceed 4e6 entries");
  }
}

}  // namespace

OperatorMatrix operator_matrix(const LinearOperator& op, const TorusGrid& grid, const FrequencyWindow& cols,
                               const FrequencyWindow& rows) {
  cols.check_fits(grid);
  rows.check_fits(grid);
  check_matrix_size(rows, cols);
  OperatorMatrix m(rows, cols);
  for (std::size_t k = 0; k < cols.size(); ++k) fill_column(m, k, op(exponential(grid, cols.frequency(k))));
  return m;
}

OperatorMatrix operator_matrix(const ToroidalSymbol& sigma, const TorusGrid& grid, const FrequencyWindow& cols,
                               const FrequencyWindow& rows) {
  cols.check_fits(grid);
  rows.check_fits(grid);
  check_matrix_size(rows, cols);
  OperatorMatrix m(rows, cols);
  parallel_for(cols.size(), [&](std::size_t k) {
    const LatticePoint xi = cols.frequency(k);
    GridFunction image(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      image[i] = sigma(grid.node(i), xi) * node_phase(grid, grid.node_index(i), xi);
    }
    fill_column(m, k, image);
  });
  return m;
}

// The eta-sum of Op(a) e_xi runs over every resolvable frequency, so the
// matrix describes the amplitude operator on the grid without truncation.
OperatorMatrix operator_matrix(const TorusAmplitude& a, const TorusGrid& grid, const FrequencyWindow& cols,
                               const FrequencyWindow& rows) {
  cols.check_fits(grid);
  rows.check_fits(grid);
  check_matrix_size(rows, cols);
  const FrequencyWindow sum = FrequencyWindow::full(grid);
  std::vector<GridFunction> images(cols.size(), GridFunction(grid));
  parallel_for(grid.size(), [&](std::size_t i) {
    const RealPoint x = grid.node(i);
    const LatticePoint jx = grid.node_index(i);
    // y-spectra of a(x, ., eta) for every eta: Op(a) e_xi (x) = sum_eta e^{i x eta} a^(x, eta - xi, eta).
    std::vector<std::vector<Complex>> spectra(sum.size());
    for (std::size_t e = 0; e < sum.size(); ++e) {
      const LatticePoint eta = sum.frequency(e);
      spectra[e] = grid_spectrum(GridFunction::sample(grid, [&](const RealPoint& y) { return a(x, y, eta); }));
    }
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const LatticePoint xi = cols.frequency(k);
      Complex acc = 0.0;
      for (std::size_t e = 0; e < sum.size(); ++e) {
        const LatticePoint eta = sum.frequency(e);
        const LatticePoint q = eta - xi;
        std::size_t idx = 0;
        for (int d = 0; d < grid.dim(); ++d)
          idx = idx * static_cast<std::size_t>(grid.points()) + static_cast<std::size_t>(fft_bin(q[d], grid.points()));
        acc += node_phase(grid, jx, eta) * spectra[e][idx];
      }
      images[k][i] = acc;
    }
  });
  OperatorMatrix m(rows, cols);
  for (std::size_t k = 0; k < cols.size(); ++k) fill_column(m, k, images[k]);
  return m;
}

double l2_bound_estimate(const OperatorMatrix& m) {
  double row_sup = 0.0;
  std::vector<double> col_sums(m.col_count(), 0.0);
  for (std::size_t r = 0; r < m.row_count(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.col_count(); ++c) {
      const double v = std::abs(m(r, c));
      s += v;
      col_sums[c] += v;
    }
    row_sup = std::max(row_sup, s);
  }
  double col_sup = 0.0;
  for (double s : col_sums) col_sup = std::max(col_sup, s);
  return std::sqrt(row_sup * col_sup);
}

double l2_bound_estimate(const ToroidalSymbol& sigma, const TorusGrid& grid, const FrequencyWindow& window) {
  return l2_bound_estimate(operator_matrix(sigma, grid, window));
}

NormEstimate operator_norm(const OperatorMatrix& m, const PowerIterationOptions& options) {
  NormEstimate est;
  if (m.col_count() == 0 || m.row_count() == 0) {
    est.converged = true;
    return est;
  }
  std::mt19937_64 gen(options.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Complex> v(m.col_count());
  for (auto& c : v) {
    const double re = u(gen);
    const double im = u(gen);
    c = {re, im};
  }
  auto norm = [](const std::vector<Complex>& w) {
    double s = 0.0;
    for (const auto& c : w) s += std::norm(c);
    return std::sqrt(s);
  };
  double nv = norm(v);
  for (auto& c : v) c /= nv;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const auto mv = m.apply(v);
    const auto w = m.apply_adjoint(mv);
    const double rho = [&] {
      double s = 0.0;
      for (const auto& c : mv) s += std::norm(c);
      return s;
    }();
    est.value = std::sqrt(rho);
    est.iterations = it;
    double resid = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) resid += std::norm(w[i] - rho * v[i]);
    resid = std::sqrt(resid);
    const double nw = norm(w);
    if (nw == 0.0) {
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    if (resid <= options.tolerance * rho) {
      est.converged = true;
      return est;
    }
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / nw;
  }
  return est;
}

BoundReport l2_bound_report(const ToroidalSymbol& sigma, const TorusGrid& grid, const FrequencyWindow& window,
                            const PowerIterationOptions& options) {
  const auto m = operator_matrix(sigma, grid, window);
  const auto norm = operator_norm(m, options);
  return {l2_bound_estimate(m), norm.value, norm.converged, window.cutoff()};
}

GridFunction KernelMatrix::apply(const GridFunction& f) const {
  if (!(f.grid() == grid)) throw Mismatch("kernel and function grids differ");
  GridFunction out(grid);
  const double scale = 1.0 / static_cast<double>(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) acc += at(i, j) * f[j];
    out[i] = acc * scale;
  });
  return out;
}

KernelMatrix kernel_from_symbol(const ToroidalSymbol& sigma, const TorusGrid& grid, const FrequencyWindow& window) {
  window.check_fits(grid);
  KernelMatrix k{grid, std::vector<Complex>(grid.size() * grid.size())};
  parallel_for(grid.size(), [&](std::size_t i) {
    const RealPoint x = grid.node(i);
    const LatticePoint jx = grid.node_index(i);
    std::vector<Complex> s(window.size());
    for (std::size_t w = 0; w < window.size(); ++w) s[w] = sigma(x, window.frequency(w));
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const LatticePoint d = jx - grid.node_index(j);
      Complex acc = 0.0;
      for (std::size_t w = 0; w < window.size(); ++w) acc += s[w] * node_phase(grid, d, window.frequency(w));
      k.values[i * grid.size() + j] = acc;
    }
  });
  return k;
}

}  // namespace tpdo
