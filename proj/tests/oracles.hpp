#pragma once

// Brute-force reference computations shared by the unit tests. They avoid
// the library's closed forms on purpose.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "tpdo/core.hpp"

namespace oracle {

using tpdo::Complex;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Complex random_complex(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double re = u(gen);
  const double im = u(gen);
  return {re, im};
}

/// Direct O(N^2) evaluation of sum_xi c(xi) e^{i x xi} at x.
inline Complex synthesize_1d(const std::vector<std::pair<int, Complex>>& terms, double x) {
  Complex acc = 0.0;
  for (const auto& [xi, c] : terms) acc += c * std::polar(1.0, x * xi);
  return acc;
}

/// Direct DFT coefficient N^{-1} sum_j f_j e^{-i x_j xi}.
inline Complex dft_1d(const std::vector<Complex>& f, int xi) {
  const int n = static_cast<int>(f.size());
  Complex acc = 0.0;
  for (int j = 0; j < n; ++j) acc += f[static_cast<std::size_t>(j)] * std::polar(1.0, -tpdo::kTwoPi * j * xi / n);
  return acc / static_cast<double>(n);
}

}  // namespace oracle
