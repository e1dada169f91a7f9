#pragma once

// Small value types shared by every module: fixed-capacity tuples for points
// of Z^n and R^n, multi-indices, integer boxes, and the error hierarchy.

#include <algorithm>
#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace tpdo {

using Complex = std::complex<double>;

inline constexpr int kMaxDim = 3;
inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383279;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A query or stencil leaves the validity window of a tabulated object.
struct OutOfDomain : Error {
  using Error::Error;
};

/// A falling factorial with negative exponent hits a vanishing factor.
struct DivisionByZero : Error {
  using Error::Error;
};

/// Shapes, grids or windows that do not fit together.
struct Mismatch : Error {
  using Error::Error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// FixedTuple
// ---------------------------------------------------------------------------

template <class T>
class FixedTuple {
 public:
  FixedTuple() = default;
  explicit FixedTuple(int n, T fill = T{}) : n_(n) {
    if (n < 0 || n > kMaxDim) {
      throw InvalidArgument("dimension must lie in [0, " + std::to_string(kMaxDim) + "]");
    }
    v_.fill(T{});
    std::fill_n(v_.begin(), n, fill);
  }
  FixedTuple(std::initializer_list<T> init) : FixedTuple(static_cast<int>(init.size())) {
    std::copy(init.begin(), init.end(), v_.begin());
  }
  template <class It>
  static FixedTuple from_range(It first, It last) {
    FixedTuple t(static_cast<int>(std::distance(first, last)));
    std::copy(first, last, t.v_.begin());
    return t;
  }

  [[nodiscard]] int size() const { return n_; }
  T& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }
  const T& operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }

  auto begin() { return v_.begin(); }
  auto end() { return v_.begin() + n_; }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.begin() + n_; }

  friend bool operator==(const FixedTuple& a, const FixedTuple& b) {
    return a.n_ == b.n_ && std::equal(a.begin(), a.end(), b.begin());
  }
  friend bool operator<(const FixedTuple& a, const FixedTuple& b) {
    if (a.n_ != b.n_) return a.n_ < b.n_;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }

  friend FixedTuple operator+(FixedTuple a, const FixedTuple& b) {
    check_same(a, b);
    for (int i = 0; i < a.n_; ++i) a[i] += b[i];
    return a;
  }
  friend FixedTuple operator-(FixedTuple a, const FixedTuple& b) {
    check_same(a, b);
    for (int i = 0; i < a.n_; ++i) a[i] -= b[i];
    return a;
  }
  friend FixedTuple operator-(FixedTuple a) {
    for (int i = 0; i < a.n_; ++i) a[i] = -a[i];
    return a;
  }

  [[nodiscard]] T sum() const { return std::accumulate(begin(), end(), T{}); }

 private:
  static void check_same(const FixedTuple& a, const FixedTuple& b) {
    if (a.n_ != b.n_) throw Mismatch("tuple dimensions differ");
  }
  std::array<T, kMaxDim> v_{};
  int n_ = 0;
};

using LatticePoint = FixedTuple<int>;
using RealPoint = FixedTuple<double>;

inline RealPoint to_real(const LatticePoint& p) {
  RealPoint r(p.size());
  for (int i = 0; i < p.size(); ++i) r[i] = p[i];
  return r;
}

inline double dot(const RealPoint& a, const RealPoint& b) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// ---------------------------------------------------------------------------
// MultiIndex
// ---------------------------------------------------------------------------

/// alpha in N^n. |alpha| and alpha! follow the usual conventions.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int n, int fill = 0) : e_(n, fill) { validate(); }
  MultiIndex(std::initializer_list<int> init) : e_(init) { validate(); }
  explicit MultiIndex(const LatticePoint& p) : e_(p) { validate(); }

  [[nodiscard]] int size() const { return e_.size(); }
  int operator[](int i) const { return e_[i]; }
  void set(int i, int value) {
    if (value < 0) throw InvalidArgument("multi-index entries must be non-negative");
    e_[i] = value;
  }
  [[nodiscard]] int order() const { return e_.sum(); }
  [[nodiscard]] const LatticePoint& as_point() const { return e_; }

  /// alpha! as an exact integer; |alpha| <= 20 keeps this inside uint64.
  [[nodiscard]] std::uint64_t factorial() const;

  /// Componentwise beta <= alpha.
  [[nodiscard]] bool dominates(const MultiIndex& beta) const {
    for (int i = 0; i < size(); ++i)
      if (beta[i] > e_[i]) return false;
    return true;
  }

  /// Index of the first non-zero entry, or -1 for alpha = 0.
  [[nodiscard]] int first_nonzero() const {
    for (int i = 0; i < size(); ++i)
      if (e_[i] != 0) return i;
    return -1;
  }

  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
    return MultiIndex(a.e_ + b.e_);
  }
  friend MultiIndex operator-(const MultiIndex& a, const MultiIndex& b) {
    return MultiIndex(a.e_ - b.e_);
  }
  friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.e_ == b.e_; }
  friend bool operator<(const MultiIndex& a, const MultiIndex& b) { return a.e_ < b.e_; }

  static MultiIndex unit(int n, int axis) {
    MultiIndex m(n);
    m.set(axis, 1);
    return m;
  }

 private:
  void validate() const {
    for (int v : e_)
      if (v < 0) throw InvalidArgument("multi-index entries must be non-negative");
  }
  LatticePoint e_;
};

std::string to_string(const MultiIndex& a);
std::string to_string(const LatticePoint& p);

/// Product of binomial coefficients C(alpha_j, beta_j).
double binomial(const MultiIndex& alpha, const MultiIndex& beta);

/// All beta with 0 <= beta <= alpha, in lexicographic order.
std::vector<MultiIndex> indices_below_or_equal(const MultiIndex& alpha);

/// All alpha in N^n with |alpha| == order.
std::vector<MultiIndex> indices_of_order(int n, int order);

/// All alpha in N^n with |alpha| < order (graded, then lexicographic).
std::vector<MultiIndex> indices_of_order_below(int n, int order);

// ---------------------------------------------------------------------------
// IntBox: closed integer box prod_j [lo_j, hi_j]
// ---------------------------------------------------------------------------

class IntBox {
 public:
  IntBox() = default;
  IntBox(LatticePoint lo, LatticePoint hi);

  static IntBox cube(int n, int lo, int hi) { return {LatticePoint(n, lo), LatticePoint(n, hi)}; }

  [[nodiscard]] int dim() const { return lo_.size(); }
  [[nodiscard]] const LatticePoint& lo() const { return lo_; }
  [[nodiscard]] const LatticePoint& hi() const { return hi_; }
  [[nodiscard]] int extent(int axis) const { return hi_[axis] - lo_[axis] + 1; }
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] bool contains(const LatticePoint& p) const;
  [[nodiscard]] bool contains(const IntBox& other) const;
  /// Row-major linear index (first axis slowest).
  [[nodiscard]] std::size_t linear_index(const LatticePoint& p) const;
  [[nodiscard]] LatticePoint point(std::size_t linear) const;
  /// Box grown by `below` downwards and `above` upwards on every axis.
  [[nodiscard]] IntBox grown(const LatticePoint& below, const LatticePoint& above) const;
  /// Smallest box containing both.
  [[nodiscard]] IntBox hull(const IntBox& other) const;

  template <class F>
  void for_each(F&& fn) const {
    const std::size_t total = size();
    for (std::size_t i = 0; i < total; ++i) fn(point(i));
  }

  friend bool operator==(const IntBox& a, const IntBox& b) { return a.lo_ == b.lo_ && a.hi_ == b.hi_; }

 private:
  LatticePoint lo_, hi_;
};

std::string to_string(const IntBox& b);

/// Box Q(theta) = {nu : min(0, theta_j) <= nu_j <= max(0, theta_j)}.
IntBox q_box(const LatticePoint& theta);

// ---------------------------------------------------------------------------
// Threading
// ---------------------------------------------------------------------------

/// Worker count used by the parallel loops inside the library (>= 1).
void set_thread_count(int threads);
int thread_count();

/// Runs fn(i) for i in [0, count), partitioned over thread_count() workers.
/// Each index is visited exactly once; callers write to disjoint slots.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

/// Shortest round-trip decimal form, locale independent.
std::string format_real(double v);

}  // namespace tpdo
