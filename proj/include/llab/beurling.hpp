#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "llab/core_sequences.hpp"
#include "llab/error.hpp"
#include "llab/io.hpp"
#include "llab/numeric.hpp"
#include "llab/sequence.hpp"

namespace llab {

/// Generalized primes, the integers they generate up to X (with multiplicity), and the
/// Mangoldt atoms p^v <= X with weight log p.
struct BeurlingSystem {
  std::vector<double> primes;  // non-decreasing, repetition allowed
  double X = 0.0;
  PointSequence integers;
  std::vector<double> atom_values;   // sorted
  std::vector<double> atom_weights;  // log p
  std::vector<double> atom_psi;      // running compensated sum of the weights

  PointSequence prime_sequence() const {
    auto s = PointSequence::from_points(primes);
    s.set_cutoff(X);
    return s;
  }
};

inline constexpr std::uint64_t kDefaultBeurlingBudget = 200'000'000;

namespace detail {

// Products along non-decreasing index chains starting at index `first`. Beyond 50 factors the
// value comes from the accumulated logarithm.
template <class Emit>
bool beurling_chains(const std::vector<double>& p, const std::vector<double>& lp, double X, double lX,
                     std::size_t first, double v, double lv, int depth, Emit& emit) {
  for (std::size_t i = first; i < p.size(); ++i) {
    const double l = lv + lp[i];
    const double w = depth + 1 > 50 ? std::exp(l) : v * p[i];
    if (w > X || (depth + 1 > 50 && l > lX + 1e-12)) break;
    if (!emit(w) || !beurling_chains(p, lp, X, lX, i, w, l, depth + 1, emit)) return false;
  }
  return true;
}

}  // namespace detail

/// Enumerates every finite product <= X, each multiset of prime indices once.
inline BeurlingSystem generate(std::vector<double> primes, double X,
                               std::uint64_t budget = kDefaultBeurlingBudget) {
  require(std::isfinite(X) && X >= 1.0, ErrorCode::InvalidArgument, "cutoff X must be >= 1");
  for (double p : primes)
    if (!(p > 1.0) || !std::isfinite(p))
      throw Error(ErrorCode::InvalidPrime, "generalized primes must exceed 1, got " + io::format_real(p));
  std::sort(primes.begin(), primes.end());

  std::vector<double> p, lp;
  for (double q : primes)
    if (q <= X) {
      p.push_back(q);
      lp.push_back(std::log(q));
    }
  const double lX = std::log(X);

  // exact count first, each branch stopping once it alone passes the budget
  std::vector<std::uint64_t> counts(p.size(), 0);
  parallel_for(p.size(), [&](std::size_t b) {
    std::uint64_t c = 1;
    auto tick = [&](double) { return ++c <= budget; };
    detail::beurling_chains(p, lp, X, lX, b, p[b], lp[b], 1, tick);
    counts[b] = c;
  });
  std::uint64_t total = 1;
  for (auto c : counts) total += c;
  if (total > budget)
    throw Error(ErrorCode::BudgetExceeded, "at least " + std::to_string(total) + " integers below X=" +
                                               io::format_real(X) + ", budget " + std::to_string(budget));

  std::vector<std::vector<double>> parts(p.size());
  parallel_for(p.size(), [&](std::size_t b) {
    auto& out = parts[b];
    out.reserve(static_cast<std::size_t>(counts[b]));
    out.push_back(p[b]);
    auto keep = [&](double w) {
      out.push_back(w);
      return true;
    };
    detail::beurling_chains(p, lp, X, lX, b, p[b], lp[b], 1, keep);
  });
  std::vector<double> all;
  all.reserve(static_cast<std::size_t>(total));
  all.push_back(1.0);
  for (auto& v : parts) {
    all.insert(all.end(), v.begin(), v.end());
    std::vector<double>().swap(v);
  }

  BeurlingSystem s;
  s.primes = primes;
  s.X = X;
  s.integers = PointSequence::from_points(std::move(all));
  s.integers.set_cutoff(X);

  std::vector<std::pair<double, double>> atoms;
  for (std::size_t j = 0; j < p.size(); ++j) {
    double v = p[j];
    for (int nu = 1; v <= X; ++nu) {
      atoms.emplace_back(v, lp[j]);
      v = nu + 1 > 50 ? std::exp((nu + 1) * lp[j]) : v * p[j];
    }
  }
  std::stable_sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  NeumaierSum run;
  for (const auto& [v, w] : atoms) {
    s.atom_values.push_back(v);
    s.atom_weights.push_back(w);
    run.add(w);
    s.atom_psi.push_back(run.value());
  }
  return s;
}

namespace detail {
inline void check_cutoff(const BeurlingSystem& s, double x) {
  if (x > s.X)
    throw Error(ErrorCode::CutoffExceeded, "x=" + io::format_real(x) + " beyond the system cutoff X=" +
                                               io::format_real(s.X));
}
inline std::size_t atoms_upto(const BeurlingSystem& s, double x) {
  return static_cast<std::size_t>(std::upper_bound(s.atom_values.begin(), s.atom_values.end(), x) -
                                  s.atom_values.begin());
}
}  // namespace detail

/// psi(x) = sum over p_j^v <= x of log p_j.
inline double psi(const BeurlingSystem& s, double x) {
  detail::check_cutoff(s, x);
  const auto n = detail::atoms_upto(s, x);
  return n == 0 ? 0.0 : s.atom_psi[n - 1];
}

inline std::int64_t pi_count(const BeurlingSystem& s, double x) {
  detail::check_cutoff(s, x);
  return static_cast<std::int64_t>(std::upper_bound(s.primes.begin(), s.primes.end(), x) - s.primes.begin());
}

/// psi(x, t) = sum over atoms <= x of log p (p^v)^{-it}.
inline cplx psi_twisted(const BeurlingSystem& s, double x, double t) {
  detail::check_cutoff(s, x);
  const auto n = detail::atoms_upto(s, x);
  const std::size_t chunks = (n + detail::kSumChunk - 1) / detail::kSumChunk;
  std::vector<cplx> parts(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    ComplexSum acc;
    for (std::size_t i = c * detail::kSumChunk; i < std::min(n, (c + 1) * detail::kSumChunk); ++i)
      acc.add(s.atom_weights[i] * std::polar(1.0, -t * std::log(s.atom_values[i])));
    parts[c] = acc.value();
  });
  ComplexSum total;
  for (const auto& v : parts) total.add(v);
  return total.value();
}

/// R(x, t) = psi(x, t) - x^{1-it}/(1-it); zero for x < 1.
inline cplx R(const BeurlingSystem& s, double x, double t) {
  if (x < 1.0) return 0.0;
  const cplx e(1.0, -t);
  return psi_twisted(s, x, t) - x * std::polar(1.0, -t * std::log(x)) / e;
}

/// pi(x, t) = sum over p_j <= x of p_j^{-it}.
inline cplx pi_twisted(const BeurlingSystem& s, double x, double t) {
  detail::check_cutoff(s, x);
  ComplexSum acc;
  for (double p : s.primes) {
    if (p > x) break;
    acc.add(std::polar(1.0, -t * std::log(p)));
  }
  return acc.value();
}

/// int_{p_1}^x u^{-it}/log u du, as int e^{(1-it)v}/v dv over [log p_1, log x].
inline cplx log_integral_twisted(double p1, double x, double t, double rel_tol = 1e-12) {
  const double a = std::log(p1), b = std::log(x);
  if (b <= a) return 0.0;
  QuadOptions o;
  o.rel_tol = rel_tol;
  o.initial_panels = oscillation_panels(a, b, t, 2);
  o.max_evals = std::max<std::size_t>(o.max_evals, 60 * o.initial_panels);
  return integrate([t](double v) { return std::exp(v) / v * std::polar(1.0, -t * v); }, a, b, o).value;
}

/// r(x, t) = pi(x, t) - int_{p_1}^x u^{-it}/log u du; zero for x < 1.
inline cplx r(const BeurlingSystem& s, double x, double t) {
  if (x < 1.0) return 0.0;
  require(!s.primes.empty(), ErrorCode::InvalidArgument, "system has no primes");
  const double p1 = s.primes.front();
  require(x >= p1, ErrorCode::InvalidArgument, "r needs x >= p_1 (or x < 1)");
  return pi_twisted(s, x, t) - log_integral_twisted(p1, x, t);
}

struct RhPoint {
  double x;
  double value;  // |psi(x) - x| / sqrt(x)
};

inline std::vector<RhPoint> rh_deviation(const BeurlingSystem& s, const std::vector<double>& x_grid) {
  std::vector<RhPoint> out;
  out.reserve(x_grid.size());
  for (double x : x_grid) {
    require(x > 0.0, ErrorCode::InvalidGrid, "grid values must be positive");
    out.push_back({x, std::abs(psi(s, x) - x) / std::sqrt(x)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization. Binary layout (native little-endian):
//   "LLABBRL1" | u64 #primes | f64 primes | f64 X | u64 #values | f64 values | i64 mult
//   | u64 #atoms | f64 atom values | f64 atom weights

namespace detail {
inline constexpr char kBeurlingMagic[8] = {'L', 'L', 'A', 'B', 'B', 'R', 'L', '1'};

template <class T>
void put(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void put_vec(std::string& out, const std::vector<T>& v) {
  put<std::uint64_t>(out, v.size());
  out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
}

struct Reader {
  std::string_view data;
  std::size_t pos = 0;
  template <class T>
  T get() {
    require(pos + sizeof(T) <= data.size(), ErrorCode::SchemaMismatch, "truncated system file");
    T v;
    std::memcpy(&v, data.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  template <class T>
  std::vector<T> get_vec(std::uint64_t n) {
    require(n <= (data.size() - pos) / sizeof(T), ErrorCode::SchemaMismatch, "truncated system file");
    std::vector<T> v(static_cast<std::size_t>(n));
    std::memcpy(v.data(), data.data() + pos, static_cast<std::size_t>(n) * sizeof(T));
    pos += static_cast<std::size_t>(n) * sizeof(T);
    return v;
  }
  template <class T>
  std::vector<T> get_vec() {
    return get_vec<T>(get<std::uint64_t>());
  }
};
}  // namespace detail

inline std::string to_binary(const BeurlingSystem& s) {
  std::string out(detail::kBeurlingMagic, 8);
  detail::put_vec(out, s.primes);
  detail::put(out, s.X);
  detail::put_vec(out, s.integers.values());
  out.append(reinterpret_cast<const char*>(s.integers.multiplicities().data()),
             s.integers.multiplicities().size() * sizeof(std::int64_t));
  detail::put_vec(out, s.atom_values);
  out.append(reinterpret_cast<const char*>(s.atom_weights.data()), s.atom_weights.size() * sizeof(double));
  return out;
}

inline BeurlingSystem from_binary(std::string_view data) {
  require(data.size() >= 8 && std::memcmp(data.data(), detail::kBeurlingMagic, 8) == 0, ErrorCode::SchemaMismatch,
          "not a Beurling system file");
  detail::Reader rd{data, 8};
  BeurlingSystem s;
  s.primes = rd.get_vec<double>();
  s.X = rd.get<double>();
  auto vals = rd.get_vec<double>();
  auto mult = rd.get_vec<std::int64_t>(vals.size());
  s.integers = PointSequence::from_atoms(std::move(vals), std::move(mult));
  s.integers.set_cutoff(s.X);
  s.atom_values = rd.get_vec<double>();
  s.atom_weights = rd.get_vec<double>(s.atom_values.size());
  require(rd.pos == data.size(), ErrorCode::SchemaMismatch, "trailing bytes in system file");
  NeumaierSum run;
  for (double w : s.atom_weights) {
    run.add(w);
    s.atom_psi.push_back(run.value());
  }
  return s;
}

inline void save_system(const BeurlingSystem& s, const std::filesystem::path& p) { io::write_file(p, to_binary(s)); }
inline BeurlingSystem load_system(const std::filesystem::path& p) { return from_binary(io::read_file(p)); }

/// CSV of the integers ("value,multiplicity"); the same layout as a point sequence.
inline std::string to_csv(const BeurlingSystem& s) { return s.integers.to_csv(); }

/// Rational primes up to n.
inline std::vector<double> rational_primes(std::int64_t n) {
  std::vector<double> out;
  if (n < 2) return out;
  std::vector<char> comp(static_cast<std::size_t>(n) + 1, 0);
  for (std::int64_t i = 2; i <= n; ++i) {
    if (comp[static_cast<std::size_t>(i)]) continue;
    out.push_back(static_cast<double>(i));
    for (std::int64_t k = i * i; k <= n; k += i) comp[static_cast<std::size_t>(k)] = 1;
  }
  return out;
}

}  // namespace llab
