#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <queue>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "llab/error.hpp"

namespace llab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
inline constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2.0;

// ---------------------------------------------------------------------------
// Compensated summation (Neumaier).

class NeumaierSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class ComplexSum {
 public:
  void add(cplx v) {
    re_.add(v.real());
    im_.add(v.imag());
  }
  void add(double v) { re_.add(v); }
  cplx value() const { return {re_.value(), im_.value()}; }

 private:
  NeumaierSum re_;
  NeumaierSum im_;
};

// ---------------------------------------------------------------------------
// Threading. Work is always split into fixed index ranges, so results never
// depend on the number of workers.

namespace detail {
inline int& thread_setting() {
  static int n = 0;
  return n;
}

inline bool& inside_worker() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

/// n <= 0 restores automatic selection (LLAB_THREADS, then hardware concurrency).
inline void set_thread_count(int n) { detail::thread_setting() = std::max(0, n); }

inline int thread_count() {
  int& n = detail::thread_setting();
  if (n > 0) return n;
  if (const char* env = std::getenv("LLAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return n = v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return n = hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(i) for i in [0, n). The exception from the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = detail::inside_worker()
                                  ? 1
                                  : std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      detail::inside_worker() = true;
      for (std::size_t i = w; i < n; i += workers) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules of arbitrary order on [-1, 1].

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int q) {
  require(q >= 1 && q <= 512, ErrorCode::InvalidArgument, "gauss_legendre order out of range");
  GaussRule r;
  r.nodes.resize(q);
  r.weights.resize(q);
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= q; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = q * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= q; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = q * (z * p0 - p1) / (z * z - 1.0);
    r.nodes[i] = -z;
    r.nodes[q - 1 - i] = z;
    r.weights[i] = r.weights[q - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (7/15) quadrature.

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  std::size_t max_evals = 5'000'000;
  std::size_t initial_panels = 1;
  bool throw_on_failure = true;
};

template <class T>
struct QuadResult {
  T value{};
  double abs_error = 0.0;
  double l1 = 0.0;  // integral of |f|, used for the roundoff floor
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Number of initial panels needed to put about one panel on each period of exp(i*freq*v).
inline std::size_t oscillation_panels(double a, double b, double freq, std::size_t per_period = 1) {
  const double periods = std::abs(freq) * std::abs(b - a) / kTwoPi;
  const double n = std::ceil(periods * static_cast<double>(per_period));
  return static_cast<std::size_t>(std::clamp(n, 1.0, 5e7));
}

namespace detail {

inline constexpr double kGkNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const cplx& v) { return std::abs(v); }

template <class T>
struct Panel {
  double a, b;
  T value;
  double err;
  double l1;
  bool operator<(const Panel& o) const { return err < o.err; }
};

template <class T, class F>
Panel<T> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T kron = fc * kKronrodWeights[7];
  T gauss = fc * kGaussWeights[3];
  double l1 = magnitude(fc) * kKronrodWeights[7];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kGkNodes[i];
    const T f1 = f(c - dx);
    const T f2 = f(c + dx);
    kron += (f1 + f2) * kKronrodWeights[i];
    l1 += (magnitude(f1) + magnitude(f2)) * kKronrodWeights[i];
    if (i % 2 == 1) gauss += (f1 + f2) * kGaussWeights[i / 2];
  }
  Panel<T> p{a, b, kron * h, magnitude(kron - gauss) * std::abs(h), l1 * std::abs(h)};
  return p;
}

}  // namespace detail

template <class F>
auto integrate(F&& f, double a, double b, const QuadOptions& opt = {})
    -> QuadResult<std::decay_t<decltype(f(0.0))>> {
  using T = std::decay_t<decltype(f(0.0))>;
  QuadResult<T> res;
  if (a == b) {
    res.converged = true;
    return res;
  }
  require(std::isfinite(a) && std::isfinite(b), ErrorCode::InvalidArgument,
          "integration limits must be finite");
  std::priority_queue<detail::Panel<T>> heap;
  const std::size_t n0 = std::max<std::size_t>(1, opt.initial_panels);
  double err = 0.0, l1 = 0.0;
  T total{};
  for (std::size_t i = 0; i < n0; ++i) {
    const double lo = a + (b - a) * static_cast<double>(i) / static_cast<double>(n0);
    const double hi = i + 1 == n0 ? b : a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(n0);
    auto p = detail::gk15<T>(f, lo, hi);
    err += p.err;
    l1 += p.l1;
    total += p.value;
    heap.push(p);
  }
  res.evaluations = 15 * n0;
  auto target = [&](const T& v) {
    return std::max({opt.abs_tol, opt.rel_tol * detail::magnitude(v),
                     64.0 * std::numeric_limits<double>::epsilon() * l1});
  };
  while (err > target(total) && res.evaluations + 30 <= opt.max_evals) {
    auto p = heap.top();
    heap.pop();
    const double mid = 0.5 * (p.a + p.b);
    if (mid == p.a || mid == p.b) {
      heap.push(p);
      break;
    }
    auto left = detail::gk15<T>(f, p.a, mid);
    auto right = detail::gk15<T>(f, mid, p.b);
    res.evaluations += 30;
    err += left.err + right.err - p.err;
    l1 += left.l1 + right.l1 - p.l1;
    total += left.value + right.value - p.value;
    heap.push(left);
    heap.push(right);
  }
  // Re-add everything with compensation to clear the drift of the running updates.
  std::vector<detail::Panel<T>> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  ComplexSum sum;
  NeumaierSum esum, lsum;
  for (const auto& p : all) {
    sum.add(p.value);
    esum.add(p.err);
    lsum.add(p.l1);
  }
  if constexpr (std::is_same_v<T, double>)
    res.value = sum.value().real();
  else
    res.value = sum.value();
  res.abs_error = esum.value();
  res.l1 = lsum.value();
  res.converged = res.abs_error <= target(res.value) * (1.0 + 1e-12);
  if (!res.converged && opt.throw_on_failure)
    throw Error(ErrorCode::QuadratureNonconverged,
                "error estimate " + std::to_string(res.abs_error) + " after " +
                    std::to_string(res.evaluations) + " evaluations");
  return res;
}

// ---------------------------------------------------------------------------
// Root finding.

/// Smallest-bracket bisection for a non-decreasing function: returns x with f(x) ~ target.
template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi, double rel_tol = 1e-15,
                         int max_iter = 400) {
  require(lo <= hi, ErrorCode::RootfindFail, "empty bracket");
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return hi;
    if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi))) return hi;
    if (f(mid) >= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Logarithmic integral normalised to vanish at 1: Li(x) = sum_{k>=1} y^k / (k k!), y = ln x.
// The shifted variant is int_1^x (1 - u^{a-1}) / ln u du = sum (1 - a^k) y^k / (k k!).

inline double shifted_log_integral(double x, double a) {
  require(x >= 1.0, ErrorCode::InvalidArgument, "log integral needs x >= 1");
  const double y = std::log(x);
  if (y == 0.0) return 0.0;
  NeumaierSum s;
  double term = 1.0;  // y^k / k!
  double ak = 1.0;
  for (int k = 1; k < 2000; ++k) {
    term *= y / k;
    ak *= a;
    const double v = (1.0 - ak) * term / k;
    s.add(v);
    if (k > y && v < 1e-18 * s.value()) break;
  }
  return s.value();
}

inline double log_integral(double x) { return shifted_log_integral(x, 0.0); }

}  // namespace llab
