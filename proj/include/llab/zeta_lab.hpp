#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "llab/beurling.hpp"
#include "llab/core_sequences.hpp"
#include "llab/error.hpp"
#include "llab/io.hpp"
#include "llab/numeric.hpp"
#include "llab/sequence.hpp"
#include "llab/template_zeta.hpp"

namespace llab {

struct ZetaValue {
  cplx value;
  double abs_error_bound = 0.0;
  std::string method;  // SERIES, EULER, CONTINUED, TEMPLATE
  double x = 0.0;      // truncation point for CONTINUED

  nlohmann::json to_json() const {
    nlohmann::json j{{"re", value.real()}, {"im", value.imag()}, {"abs_error_bound", abs_error_bound},
                     {"method", method}};
    if (method == "CONTINUED") j["x"] = x;
    return j;
  }
};

namespace detail {

struct PowerSum {
  cplx value;
  double roundoff = 0.0;
};

// sum over the first n points of w_i v_i^{-s}. Each phase carries an error of about |tau| ulp(ln v).
inline PowerSum power_sum(const std::vector<double>& v, const std::vector<double>& w, std::size_t n, cplx s) {
  const std::size_t chunks = (n + kSumChunk - 1) / kSumChunk;
  std::vector<cplx> parts(chunks);
  std::vector<double> l1(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    ComplexSum acc;
    NeumaierSum mag;
    for (std::size_t i = c * kSumChunk; i < std::min(n, (c + 1) * kSumChunk); ++i) {
      const double l = std::log(v[i]);
      const double m = w[i] * std::exp(-s.real() * l);
      acc.add(m * std::polar(1.0, -s.imag() * l));
      mag.add(std::abs(m) * (std::abs(s.imag()) * std::abs(l) + 4.0));
    }
    parts[c] = acc.value();
    l1[c] = mag.value();
  });
  ComplexSum total;
  NeumaierSum mag;
  for (std::size_t c = 0; c < chunks; ++c) {
    total.add(parts[c]);
    mag.add(l1[c]);
  }
  return {total.value(), 2.0 * kUnitRoundoff * mag.value()};
}

inline std::vector<double> as_weights(const PointSequence& seq) {
  return {seq.multiplicities().begin(), seq.multiplicities().end()};
}

// A sigma X^{1-sigma}/(sigma-1) + A X^{1-sigma}: bound for the sum over points > X when N(u) <= A u.
inline double dirichlet_tail(double A, double sigma, double X) {
  const double p = std::pow(X, 1.0 - sigma);
  return A * sigma * p / (sigma - 1.0) + A * p;
}

}  // namespace detail

/// sup over u in [1, hi] of |F(u) - A u| / u^theta, where F jumps by w_i at v_i.
/// F - A u is monotone between jumps, so the sup is attained at a jump (either side) or at an end.
inline double measured_constant(const std::vector<double>& v, const std::vector<double>& w, double A, double theta,
                                double hi) {
  double sup = 0.0;
  double F = 0.0;
  auto look = [&](double u, double f) { sup = std::max(sup, std::abs(f - A * u) / std::pow(u, theta)); };
  look(1.0, 0.0);
  std::size_t i = 0;
  for (; i < v.size() && v[i] < 1.0; ++i) F += w[i];
  look(1.0, F);
  for (; i < v.size() && v[i] <= hi; ++i) {
    look(v[i], F);
    F += w[i];
    look(v[i], F);
  }
  look(hi, F);
  return sup;
}

inline double measured_constant(const PointSequence& seq, double A, double theta, double hi) {
  return measured_constant(seq.values(), detail::as_weights(seq), A, theta, hi);
}

// ---------------------------------------------------------------------------

/// Partial sum over every stored point, plus the tail bound for N(u) <= tail_A u beyond the cutoff.
inline ZetaValue zeta_series(const PointSequence& seq, cplx s, double tail_A = 1.0) {
  if (!(s.real() > 1.0)) throw Error(ErrorCode::SigmaTooSmall, "zeta_series needs sigma > 1");
  const std::size_t n = seq.index_upto(seq.cutoff());
  ZetaValue z;
  z.method = "SERIES";
  const auto ps = detail::power_sum(seq.values(), detail::as_weights(seq), n, s);
  z.value = ps.value;
  z.abs_error_bound =
      (seq.cutoff() > 1.0 ? detail::dirichlet_tail(tail_A, s.real(), seq.cutoff()) : HUGE_VAL) + ps.roundoff;
  return z;
}

inline ZetaValue zeta_series(const BeurlingSystem& sys, cplx s, double tail_A = 1.0) {
  return zeta_series(sys.integers, s, tail_A);
}

/// Product over the primes <= P, with the truncation bounded through pi(u) <= A_pi u.
/// A_pi = 0 declares the prime list complete.
inline ZetaValue zeta_euler(const std::vector<double>& primes, cplx s, double P, double A_pi = 1.0) {
  if (!(s.real() > 1.0)) throw Error(ErrorCode::SigmaTooSmall, "zeta_euler needs sigma > 1");
  ComplexSum lg;
  std::size_t used = 0;
  for (double p : primes) {
    if (p > P) continue;
    require(p > 1.0, ErrorCode::InvalidPrime, "primes must exceed 1");
    const double l = std::log(p);
    lg.add(-std::log(1.0 - std::exp(-s.real() * l) * std::polar(1.0, -s.imag() * l)));
    ++used;
  }
  ZetaValue z;
  z.method = "EULER";
  z.value = std::exp(lg.value());
  double delta = 0.0;
  if (A_pi > 0.0) delta = detail::dirichlet_tail(A_pi, s.real(), P) / (1.0 - std::pow(P, -s.real()));
  z.abs_error_bound = std::abs(z.value) * (std::expm1(delta) + 8.0 * kUnitRoundoff * static_cast<double>(used + 1));
  return z;
}

/// sum_{n <= x} n^{-s} - A x^{1-s}/(1-s), valid for sigma > theta when N(u) = A u + O(u^theta).
/// The O-constant is measured on the stored range up to the cutoff.
inline ZetaValue zeta_continued(const PointSequence& seq, double A, cplx s, double x, double theta,
                                double C_E = -1.0) {
  if (!(s.real() > theta))
    throw Error(ErrorCode::SigmaBelowTheta, "zeta_continued needs sigma > theta");
  require(x >= 1.0, ErrorCode::InvalidArgument, "zeta_continued needs x >= 1");
  if (x > seq.cutoff())
    throw Error(ErrorCode::CutoffExceeded, "x=" + io::format_real(x) + " beyond the sequence cutoff");
  if (std::abs(s - 1.0) < 1e-8) throw Error(ErrorCode::PoleProximity, "s within 1e-8 of the pole");
  if (C_E < 0.0) C_E = measured_constant(seq, A, theta, seq.cutoff());
  const std::size_t n = seq.index_upto(x);
  ZetaValue z;
  z.method = "CONTINUED";
  z.x = x;
  const cplx e = 1.0 - s;
  const cplx main = A * std::exp(e.real() * std::log(x)) * std::polar(1.0, e.imag() * std::log(x)) / e;
  const auto ps = detail::power_sum(seq.values(), detail::as_weights(seq), n, s);
  z.value = ps.value - main;
  z.abs_error_bound = C_E * (1.0 + std::abs(s) / (s.real() - theta)) * std::pow(x, theta - s.real()) +
                      ps.roundoff + 8.0 * kUnitRoundoff * std::abs(main) * (1.0 + std::abs(s.imag()) * std::log(x));
  return z;
}

/// -zeta'/zeta(s) ~ sum_{atoms <= x} Lambda n^{-s} - x^{1-s}/(1-s), with
/// |error| <= C_R (1 + |s|/(sigma - eps)) x^{eps - sigma}, C_R = sup |psi(u) - u| / u^eps on the system.
inline ZetaValue log_deriv(const BeurlingSystem& sys, cplx s, double x, double eps = 0.5, double C_R = -1.0) {
  if (!(s.real() > eps)) throw Error(ErrorCode::SigmaTooSmall, "log_deriv needs sigma > eps");
  require(x >= 1.0, ErrorCode::InvalidArgument, "log_deriv needs x >= 1");
  if (x > sys.X) throw Error(ErrorCode::CutoffExceeded, "x beyond the system cutoff");
  if (std::abs(s - 1.0) < 1e-8) throw Error(ErrorCode::PoleProximity, "s within 1e-8 of the pole");
  if (C_R < 0.0) C_R = measured_constant(sys.atom_values, sys.atom_weights, 1.0, eps, sys.X);
  const auto n = static_cast<std::size_t>(std::upper_bound(sys.atom_values.begin(), sys.atom_values.end(), x) -
                                          sys.atom_values.begin());
  const cplx e = 1.0 - s;
  const cplx main = std::exp(e.real() * std::log(x)) * std::polar(1.0, e.imag() * std::log(x)) / e;
  ZetaValue z;
  z.method = "CONTINUED";
  z.x = x;
  const auto ps = detail::power_sum(sys.atom_values, sys.atom_weights, n, s);
  z.value = ps.value - main;
  z.abs_error_bound = C_R * (1.0 + std::abs(s) / (s.real() - eps)) * std::pow(x, eps - s.real()) +
                      ps.roundoff + 8.0 * kUnitRoundoff * std::abs(main) * (1.0 + std::abs(s.imag()) * std::log(x));
  return z;
}

inline ZetaValue template_value(const zeta::TemplateZetaParams& p, cplx s, int k_max = -1) {
  return {zeta::template_logderiv(p, s, k_max), 64.0 * kUnitRoundoff * (1.0 + std::abs(s)), "TEMPLATE", 0.0};
}

// ---------------------------------------------------------------------------
// Perron inversion.

/// F(s) = sum_j a_j n_j^{-s} with finitely many stored terms.
struct DirichletSeries {
  std::vector<double> n;
  std::vector<double> a;

  static DirichletSeries of(const PointSequence& seq) { return {seq.values(), detail::as_weights(seq)}; }
  static DirichletSeries mangoldt(const BeurlingSystem& sys) { return {sys.atom_values, sys.atom_weights}; }

  cplx operator()(cplx s) const { return detail::power_sum(n, a, n.size(), s).value; }

  double partial(double x) const {
    NeumaierSum acc;
    for (std::size_t i = 0; i < n.size() && n[i] <= x; ++i) acc.add(a[i]);
    return acc.value();
  }
};

/// E_1(z) = int_z^inf e^{-w}/w dw, principal branch.
inline cplx expint_e1(cplx z) {
  require(z != cplx(0.0), ErrorCode::PoleProximity, "E1 at 0");
  constexpr double kEulerGamma = 0.57721566490153286061;
  auto series = [&] {
    ComplexSum acc;
    acc.add(-kEulerGamma);
    acc.add(-std::log(z));
    cplx term = 1.0;
    for (int k = 1; k < 500; ++k) {
      term *= -z / static_cast<double>(k);
      const cplx add = -term / static_cast<double>(k);
      acc.add(add);
      if (std::abs(add) < 1e-18 * std::abs(acc.value())) break;
    }
    return acc.value();
  };
  if (std::abs(z) < 2.0) return series();
  // modified Lentz on e^{z} E1(z) = 1/(z+1- 1/(z+3- 4/(z+5- ...)))
  const double tiny = 1e-300;
  cplx b = z + 1.0;
  cplx c = 1.0 / tiny;
  cplx d = 1.0 / b;
  cplx h = d;
  for (int i = 1; i < 20000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const cplx del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return h * std::exp(-z);
  }
  if (std::abs(z) < 12.0) return series();
  throw Error(ErrorCode::QuadratureNonconverged, "E1 continued fraction did not converge");
}

struct PerronResult {
  cplx value;
  double truncation_bound = 0.0;  // x^k sum |a_j| / (n_j^k (1 + T |ln(x/n_j)|))
  double numeric_error = 0.0;
  double kappa = 0.0;
  double T = 0.0;
  std::string method;

  double budget() const { return truncation_bound + numeric_error; }

  nlohmann::json to_json() const {
    return {{"re", value.real()},      {"im", value.imag()}, {"truncation_bound", truncation_bound},
            {"numeric_error", numeric_error}, {"budget", budget()},   {"kappa", kappa},
            {"T", T},                  {"method", method}};
  }
};

/// Truncation term of the effective Perron formula. Terms with T |ln(x/n)| < 1 use 2/(1 + T|L|),
/// which keeps the bound valid for them too (the truncated integral of a term is within
/// y^k min(1, 1/(pi T |L|)) of its jump).
inline double perron_truncation_bound(const DirichletSeries& F, double x, double kappa, double T) {
  NeumaierSum acc;
  for (std::size_t i = 0; i < F.n.size(); ++i) {
    const double L = std::log(x / F.n[i]);
    const double tl = T * std::abs(L);
    acc.add(std::abs(F.a[i]) * std::exp(kappa * L) * (tl >= 1.0 ? 1.0 : 2.0) / (1.0 + tl));
  }
  return acc.value();
}

namespace detail {
inline void perron_checks(const DirichletSeries& F, double x, double kappa, double T) {
  require(kappa > 0.0, ErrorCode::InvalidArgument, "kappa must be positive");
  require(T >= 1.0, ErrorCode::InvalidArgument, "T must be >= 1");
  require(x >= 1.0, ErrorCode::InvalidArgument, "x must be >= 1");
  require(!std::binary_search(F.n.begin(), F.n.end(), x), ErrorCode::InvalidArgument,
          "x must not coincide with a point of the series");
}
}  // namespace detail

/// (1/2 pi i) int_{k-iT}^{k+iT} F(s) x^s ds/s for a stored Dirichlet series, one term at a time:
/// each term is [L > 0] - Im E1(-L (k + iT)) / pi with L = ln(x/n_j).
inline PerronResult perron_count(const DirichletSeries& F, double x, double kappa, double T) {
  detail::perron_checks(F, x, kappa, T);
  const std::size_t n = F.n.size();
  const std::size_t chunks = (n + detail::kSumChunk - 1) / detail::kSumChunk;
  std::vector<cplx> parts(chunks);
  std::vector<double> errs(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    ComplexSum acc;
    NeumaierSum err;
    for (std::size_t i = c * detail::kSumChunk; i < std::min(n, (c + 1) * detail::kSumChunk); ++i) {
      const double L = std::log(x / F.n[i]);
      const cplx z = -L * cplx(kappa, T);
      const cplx e1 = expint_e1(z);
      const double jump = L > 0.0 ? 1.0 : 0.0;
      acc.add(F.a[i] * (jump - e1.imag() / kPi));
      err.add(std::abs(F.a[i]) * (1e-13 * std::abs(e1) + 4.0 * kUnitRoundoff));
    }
    parts[c] = acc.value();
    errs[c] = err.value();
  });
  ComplexSum total;
  NeumaierSum err;
  for (std::size_t c = 0; c < chunks; ++c) {
    total.add(parts[c]);
    err.add(errs[c]);
  }
  PerronResult r;
  r.value = total.value();
  r.numeric_error = err.value();
  r.truncation_bound = perron_truncation_bound(F, x, kappa, T);
  r.kappa = kappa;
  r.T = T;
  r.method = "TERMWISE";
  return r;
}

/// Black-box form: composite 16-point Gauss-Legendre panels of height quad_step on [-T, T],
/// halved until two passes agree to 1e-8 relative. The truncation bound needs the coefficients.
inline PerronResult perron_integral(const std::function<cplx(cplx)>& F, double x, double kappa, double T,
                                    double quad_step = 0.25, const DirichletSeries* coeffs = nullptr) {
  require(kappa > 0.0 && T >= 1.0 && x >= 1.0 && quad_step > 0.0, ErrorCode::InvalidArgument,
          "need kappa > 0, T >= 1, x >= 1, quad_step > 0");
  if (coeffs) detail::perron_checks(*coeffs, x, kappa, T);
  const auto& gl = gauss_legendre(16);
  const double lx = std::log(x);
  auto pass = [&](double h) {
    const auto panels = static_cast<std::size_t>(std::ceil(2.0 * T / h));
    const double hh = 2.0 * T / static_cast<double>(panels);
    std::vector<cplx> part(panels);
    parallel_for(panels, [&](std::size_t p) {
      const double a = -T + hh * static_cast<double>(p);
      ComplexSum acc;
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double tau = a + 0.5 * hh * (gl.nodes[q] + 1.0);
        const cplx s(kappa, tau);
        acc.add(gl.weights[q] * F(s) * std::exp(kappa * lx) * std::polar(1.0, tau * lx) / s);
      }
      part[p] = acc.value() * (0.5 * hh);
    });
    ComplexSum total;
    for (const auto& v : part) total.add(v);
    return total.value() / kTwoPi;
  };
  double h = quad_step;
  cplx prev = pass(h);
  for (int it = 0; it < 8; ++it) {
    h *= 0.5;
    const cplx cur = pass(h);
    const double diff = std::abs(cur - prev);
    if (diff <= 1e-8 * std::max(1.0, std::abs(cur))) {
      PerronResult r;
      r.value = cur;
      r.numeric_error = diff;
      r.truncation_bound = coeffs ? perron_truncation_bound(*coeffs, x, kappa, T) : HUGE_VAL;
      r.kappa = kappa;
      r.T = T;
      r.method = "QUADRATURE";
      return r;
    }
    prev = cur;
  }
  throw Error(ErrorCode::QuadratureNonconverged, "Perron quadrature did not settle after 8 halvings");
}

/// Smallest T in [lo, hi] (bisection in log T) whose truncation bound is <= target; hi if none.
inline double perron_choose_T(const DirichletSeries& F, double x, double kappa, double target = 0.4,
                              double lo = 1e4, double hi = 1e7) {
  if (perron_truncation_bound(F, x, kappa, lo) <= target) return lo;
  if (perron_truncation_bound(F, x, kappa, hi) > target) return hi;
  double a = std::log(lo), b = std::log(hi);
  for (int it = 0; it < 40; ++it) {
    const double m = 0.5 * (a + b);
    (perron_truncation_bound(F, x, kappa, std::exp(m)) <= target ? b : a) = m;
  }
  return std::exp(b);
}

inline double perron_default_kappa(double x) { return 1.0 + 1.0 / std::log(x); }

// ---------------------------------------------------------------------------
// Convexity, critical line, LH-tilde.

struct ConvexityEntry {
  double sigma, tau;
  double abs_zeta;
  double err_bound;
  double C;  // |zeta| divided by the applicable bound shape
  std::string branch;  // "strip" for sigma < 3/4, "log" otherwise
};

struct ConvexityReport {
  std::vector<ConvexityEntry> entries;
  double C_max = 0.0;
  double C_max_lower_half = 0.0;  // over the smaller half of the tau grid
  double C_E = 0.0;
  bool stable = false;
  std::string caveat =
      "bounds presuppose no zeros of zeta in sigma > 1/2; only the sampled grid is checked";

  nlohmann::json to_json() const {
    nlohmann::json j{{"C_max", C_max}, {"C_max_lower_half", C_max_lower_half}, {"C_E", C_E},
                     {"stable", stable}, {"caveat", caveat}};
    auto& arr = j["entries"] = nlohmann::json::array();
    for (const auto& e : entries)
      arr.push_back({{"sigma", e.sigma}, {"tau", e.tau}, {"abs_zeta", e.abs_zeta}, {"err_bound", e.err_bound},
                     {"C", e.C}, {"branch", e.branch}});
    return j;
  }
};

/// zeta continued with x = cutoff and theta = 1/2; C = |zeta| ((sigma-1/2)/(|tau|+1))^{2-2sigma} for
/// sigma < 3/4 and |zeta| / (|tau|^{2-2sigma} log|tau| + 1) for sigma >= 3/4 (|tau| >= 2).
/// Stable when the sup of C over the full tau grid is at most 1.25 times the sup over its lower half.
inline ConvexityReport convexity_check(const PointSequence& seq, double A, const std::vector<double>& sigma_grid,
                                       const std::vector<double>& tau_grid, double theta = 0.5) {
  require(!sigma_grid.empty() && !tau_grid.empty(), ErrorCode::InvalidGrid, "empty grid");
  ConvexityReport rep;
  rep.C_E = measured_constant(seq, A, theta, seq.cutoff());
  std::vector<double> taus = tau_grid;
  std::sort(taus.begin(), taus.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  const double median = std::abs(taus[(taus.size() - 1) / 2]);
  for (double sg : sigma_grid) {
    require(sg > 0.5 && sg <= 1.0, ErrorCode::InvalidGrid, "sigma grid must lie in (1/2, 1]");
    for (double tau : taus) {
      const cplx s(sg, tau);
      if (std::abs(s - 1.0) < 0.25) continue;
      ConvexityEntry e{sg, tau, 0.0, 0.0, 0.0, sg < 0.75 ? "strip" : "log"};
      if (e.branch == "log" && std::abs(tau) < 2.0) continue;
      const auto z = zeta_continued(seq, A, s, seq.cutoff(), theta, rep.C_E);
      e.abs_zeta = std::abs(z.value);
      e.err_bound = z.abs_error_bound;
      const double at = std::abs(tau);
      e.C = e.branch == "strip" ? e.abs_zeta * std::pow((sg - 0.5) / (at + 1.0), 2.0 - 2.0 * sg)
                                : e.abs_zeta / (std::pow(at, 2.0 - 2.0 * sg) * std::log(at) + 1.0);
      rep.C_max = std::max(rep.C_max, e.C);
      if (at <= median) rep.C_max_lower_half = std::max(rep.C_max_lower_half, e.C);
      rep.entries.push_back(e);
    }
  }
  rep.stable = !rep.entries.empty() && rep.C_max <= 1.25 * rep.C_max_lower_half;
  return rep;
}

struct CriticalLineRow {
  double tau;
  double abs_zeta;
  double err_bound;
};

struct CriticalLineScan {
  std::vector<CriticalLineRow> rows;
  double slope = 0.0;      // least squares of ln|zeta| against ln tau
  double intercept = 0.0;
  double B = 0.0;
  double C_E = 0.0;

  std::string to_csv() const {
    std::string out = "tau,abs_zeta,method,err_bound\n";
    for (const auto& r : rows)
      out += io::format_real(r.tau) + ',' + io::format_real(r.abs_zeta) + ",CONTINUED," +
             io::format_real(r.err_bound) + '\n';
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"slope", slope}, {"intercept", intercept}, {"B", B}, {"C_E", C_E}};
    auto& arr = j["rows"] = nlohmann::json::array();
    for (const auto& r : rows)
      arr.push_back({{"tau", r.tau}, {"abs_zeta", r.abs_zeta}, {"method", "CONTINUED"}, {"err_bound", r.err_bound}});
    return j;
  }
};

/// Least-squares slope and intercept of y against x.
inline std::pair<double, double> fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size() && xs.size() >= 2, ErrorCode::InvalidArgument, "need two points to fit");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

/// |zeta(1/2 + i tau)| from the truncated sum at x = |tau|^B, B = 1/(1/2 - theta).
inline CriticalLineScan critical_line_scan(const PointSequence& seq, double A, const std::vector<double>& tau_grid,
                                           double theta = 0.0) {
  require(theta >= 0.0 && theta < 0.5, ErrorCode::InvalidArgument, "theta must lie in [0, 1/2)");
  require(tau_grid.size() >= 2, ErrorCode::InvalidGrid, "need at least two ordinates");
  CriticalLineScan out;
  out.B = 1.0 / (0.5 - theta);
  for (double tau : tau_grid) {
    require(std::abs(tau) >= 2.0, ErrorCode::InvalidGrid, "ordinates must satisfy |tau| >= 2");
    if (std::pow(std::abs(tau), out.B) > seq.cutoff())
      throw Error(ErrorCode::CutoffExceeded, "x = |tau|^B beyond the sequence cutoff at tau=" + io::format_real(tau));
  }
  out.C_E = measured_constant(seq, A, theta, seq.cutoff());
  out.rows.resize(tau_grid.size());
  parallel_for(tau_grid.size(), [&](std::size_t i) {
    const double tau = tau_grid[i];
    const auto z = zeta_continued(seq, A, cplx(0.5, tau), std::pow(std::abs(tau), out.B), theta, out.C_E);
    out.rows[i] = {tau, std::abs(z.value), z.abs_error_bound};
  });
  std::vector<double> lx, ly;
  for (const auto& r : out.rows) {
    lx.push_back(std::log(std::abs(r.tau)));
    ly.push_back(std::log(r.abs_zeta));
  }
  std::tie(out.slope, out.intercept) = fit_line(lx, ly);
  return out;
}

struct LhTildeEntry {
  double x;
  std::int64_t N;
  double t_at_sup;
  double ratio;  // sup |S(x,t)| / (N^{1/2} |t|^eps) over the sampled t >= N^{1/2}
  std::size_t samples;
};

struct LhTildeReport {
  std::vector<LhTildeEntry> entries;
  double eps = 0.0;
  double sup_ratio = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json j{{"eps", eps}, {"sup_ratio", sup_ratio}};
    auto& arr = j["entries"] = nlohmann::json::array();
    for (const auto& e : entries)
      arr.push_back({{"x", e.x}, {"N", e.N}, {"t_at_sup", e.t_at_sup}, {"ratio", e.ratio}, {"samples", e.samples}});
    return j;
  }
};

/// For each x, t_budget log-spaced ordinates in [N(x)^{1/2}, x N(x)^{1/2}] plus any extra ordinates
/// with |t| >= N(x)^{1/2}.
inline LhTildeReport lh_tilde_check(const PointSequence& seq, const std::vector<double>& x_grid, std::size_t t_budget,
                                    double eps, const std::vector<double>& extra_t = {}) {
  require(!x_grid.empty(), ErrorCode::InvalidGrid, "x grid is empty");
  LhTildeReport rep;
  rep.eps = eps;
  for (double x : x_grid) {
    require(x > 0.0 && x <= seq.cutoff(), ErrorCode::InvalidGrid, "x outside the sequence range");
    LhTildeEntry e{x, seq.counting(x), 0.0, 0.0, 0};
    if (e.N == 0) {
      rep.entries.push_back(e);
      continue;
    }
    const double root = std::sqrt(static_cast<double>(e.N));
    const double t0 = std::max(root, 1.0 + 1e-9);
    std::vector<double> ts;
    for (std::size_t i = 0; i < t_budget; ++i)
      ts.push_back(t_budget == 1 ? t0 : t0 * std::pow(std::max(x, 2.0), double(i) / double(t_budget - 1)));
    for (double t : extra_t)
      if (std::abs(t) >= root) ts.push_back(t);
    std::vector<double> ratio(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
      ratio[i] = std::abs(exp_sum(seq, x, ts[i]).value) / (root * std::pow(std::abs(ts[i]), eps));
    for (std::size_t i = 0; i < ts.size(); ++i)
      if (ratio[i] > e.ratio) {
        e.ratio = ratio[i];
        e.t_at_sup = ts[i];
      }
    e.samples = ts.size();
    rep.sup_ratio = std::max(rep.sup_ratio, e.ratio);
    rep.entries.push_back(e);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Template lower bound.

/// First window k (1-based) with delta_k (1 + sigma_hi - beta) <= eps, where the main term of eta_k at
/// sigma + i tau_k has size tau_k^{beta - sigma - delta_k (1 + sigma - beta)} / (2 (1 + sigma - beta)).
inline int first_admissible_window(const zeta::TemplateZetaParams& p, double sigma_hi, double eps) {
  for (std::size_t k = 0; k < p.delta.size(); ++k)
    if (p.delta[k] * (1.0 + sigma_hi - p.beta) <= eps) return static_cast<int>(k) + 1;
  return 0;
}

}  // namespace llab
