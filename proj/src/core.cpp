#include "tpdo/core.hpp"

#include <atomic>
#include <charconv>
#include <mutex>
#include <sstream>
#include <thread>

namespace tpdo {

std::uint64_t MultiIndex::factorial() const {
  if (order() > 20) throw InvalidArgument("alpha! overflows for |alpha| > 20");
  std::uint64_t f = 1;
  for (int v : e_)
    for (int k = 2; k <= v; ++k) f *= static_cast<std::uint64_t>(k);
  return f;
}

namespace {
template <class Tuple>
std::string tuple_string(const Tuple& t) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i];
  os << ')';
  return os.str();
}
}  // namespace

std::string to_string(const MultiIndex& a) { return tuple_string(a); }
std::string to_string(const LatticePoint& p) { return tuple_string(p); }

double binomial(const MultiIndex& alpha, const MultiIndex& beta) {
  double c = 1.0;
  for (int j = 0; j < alpha.size(); ++j) {
    const int a = alpha[j];
    const int b = beta[j];
    if (b < 0 || b > a) return 0.0;
    double cj = 1.0;
    for (int i = 1; i <= b; ++i) cj = cj * (a - b + i) / i;
    c *= cj;
  }
  return c;
}

std::vector<MultiIndex> indices_below_or_equal(const MultiIndex& alpha) {
  LatticePoint hi = alpha.as_point();
  IntBox box(LatticePoint(alpha.size(), 0), hi);
  std::vector<MultiIndex> out;
  out.reserve(box.size());
  box.for_each([&](const LatticePoint& p) { out.emplace_back(p); });
  return out;
}

std::vector<MultiIndex> indices_of_order(int n, int order) {
  std::vector<MultiIndex> out;
  if (n == 0) {
    if (order == 0) out.emplace_back(0);
    return out;
  }
  IntBox box = IntBox::cube(n, 0, order);
  box.for_each([&](const LatticePoint& p) {
    if (p.sum() == order) out.emplace_back(p);
  });
  return out;
}

std::vector<MultiIndex> indices_of_order_below(int n, int order) {
  std::vector<MultiIndex> out;
  for (int k = 0; k < order; ++k) {
    auto level = indices_of_order(n, k);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

IntBox::IntBox(LatticePoint lo, LatticePoint hi) : lo_(lo), hi_(hi) {
  if (lo.size() != hi.size()) throw Mismatch("box corners have different dimensions");
  for (int i = 0; i < lo.size(); ++i)
    if (hi[i] < lo[i]) throw InvalidArgument("empty box " + to_string(lo) + ".." + to_string(hi));
}

std::size_t IntBox::size() const {
  std::size_t s = 1;
  for (int i = 0; i < dim(); ++i) s *= static_cast<std::size_t>(extent(i));
  return s;
}

bool IntBox::contains(const LatticePoint& p) const {
  if (p.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (p[i] < lo_[i] || p[i] > hi_[i]) return false;
  return true;
}

bool IntBox::contains(const IntBox& other) const { return contains(other.lo_) && contains(other.hi_); }

std::size_t IntBox::linear_index(const LatticePoint& p) const {
  if (!contains(p)) throw OutOfDomain("point " + to_string(p) + " outside box " + to_string(*this));
  std::size_t idx = 0;
  for (int i = 0; i < dim(); ++i) idx = idx * static_cast<std::size_t>(extent(i)) + static_cast<std::size_t>(p[i] - lo_[i]);
  return idx;
}

LatticePoint IntBox::point(std::size_t linear) const {
  LatticePoint p(dim());
  for (int i = dim() - 1; i >= 0; --i) {
    const auto e = static_cast<std::size_t>(extent(i));
    p[i] = lo_[i] + static_cast<int>(linear % e);
    linear /= e;
  }
  return p;
}

IntBox IntBox::grown(const LatticePoint& below, const LatticePoint& above) const {
  return {lo_ - below, hi_ + above};
}

IntBox IntBox::hull(const IntBox& other) const {
  LatticePoint lo = lo_, hi = hi_;
  for (int i = 0; i < dim(); ++i) {
    lo[i] = std::min(lo[i], other.lo_[i]);
    hi[i] = std::max(hi[i], other.hi_[i]);
  }
  return {lo, hi};
}

std::string to_string(const IntBox& b) { return "[" + to_string(b.lo()) + ".." + to_string(b.hi()) + "]"; }

IntBox q_box(const LatticePoint& theta) {
  LatticePoint lo(theta.size()), hi(theta.size());
  for (int i = 0; i < theta.size(); ++i) {
    lo[i] = std::min(0, theta[i]);
    hi[i] = std::max(0, theta[i]);
  }
  return {lo, hi};
}

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int threads) { g_threads.store(std::max(1, threads)); }
int thread_count() { return g_threads.load(); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(thread_count());
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string format_real(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

}  // namespace tpdo
