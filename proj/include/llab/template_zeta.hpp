#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "llab/error.hpp"
#include "llab/numeric.hpp"

namespace llab::zeta {

/// Oscillating windows of the template Chebyshev function
///   psi_C(x) = x - ln x - 1 + sum_k R_k(x),  dR_k = tau_k cos(tau_k ln u) u^{beta-2} du on [A_k, B_k).
/// A_k = tau_k^{1+delta_k}, B_k = tau_k^{nu_k}, then moved so that tau_k ln A_k, tau_k ln B_k are
/// multiples of 2 pi.
struct TemplateZetaParams {
  double beta = 0.75;
  std::vector<double> tau;
  std::vector<double> delta;
  std::vector<double> nu;

  /// ln tau_k = 9 2^{k-1}, delta_k = 1/(12k), nu_k = 2 - 1/(k+2).
  static TemplateZetaParams defaults(double beta = 0.75, int k_max = 6) {
    require(k_max >= 1, ErrorCode::InvalidArgument, "k_max must be >= 1");
    TemplateZetaParams p;
    p.beta = beta;
    for (int k = 1; k <= k_max; ++k) {
      p.tau.push_back(std::exp(9.0 * std::ldexp(1.0, k - 1)));
      p.delta.push_back(1.0 / (12.0 * k));
      p.nu.push_back(2.0 - 1.0 / (k + 2));
    }
    return p;
  }
};

struct TemplateWindow {
  double tau;
  double delta;
  double log_a;  // adjusted ln A_k
  double log_b;  // adjusted ln B_k
  double raw_log_a;
  double raw_log_b;
};

inline double snap_to_period(double tau, double log_v) {
  return kTwoPi * std::round(tau * log_v / kTwoPi) / tau;
}

inline std::vector<TemplateWindow> template_windows(const TemplateZetaParams& p) {
  require(p.beta > 0.5 && p.beta < 1.0, ErrorCode::InvalidArgument, "beta must lie in (1/2, 1)");
  require(p.tau.size() == p.delta.size() && p.tau.size() == p.nu.size(), ErrorCode::InvalidArgument,
          "tau/delta/nu must have equal length");
  std::vector<TemplateWindow> w;
  for (std::size_t k = 0; k < p.tau.size(); ++k) {
    const double tau = p.tau[k];
    require(tau > 1.0 && std::isfinite(tau), ErrorCode::InvalidArgument, "tau_k must exceed 1");
    require(k == 0 || tau > p.tau[k - 1], ErrorCode::InvalidArgument, "tau_k must increase");
    const double la = (1.0 + p.delta[k]) * std::log(tau);
    const double lb = p.nu[k] * std::log(tau);
    TemplateWindow win{tau, p.delta[k], snap_to_period(tau, la), snap_to_period(tau, lb), la, lb};
    require(win.log_a > 0.0 && win.log_a < win.log_b, ErrorCode::InvalidArgument,
            "template window needs 1 < A_k < B_k");
    require(w.empty() || win.log_a > w.back().log_b, ErrorCode::InvalidArgument,
            "template windows must be disjoint (B_k < A_{k+1})");
    w.push_back(win);
  }
  return w;
}

inline std::vector<TemplateWindow> truncate_windows(std::vector<TemplateWindow> w, int k_max) {
  if (k_max >= 0 && static_cast<std::size_t>(k_max) < w.size()) w.resize(static_cast<std::size_t>(k_max));
  return w;
}

/// R_k(x) from the closed form tau Re[u^{beta-1+i tau} / (beta-1+i tau)] over [A_k, min(x, B_k)].
inline double template_r(const TemplateWindow& w, double beta, double x) {
  const double lx = std::log(x);
  if (lx <= w.log_a) return 0.0;
  const double lu = std::min(lx, w.log_b);
  const cplx c(beta - 1.0, w.tau);
  // tau ln A is a multiple of 2 pi, so only the offset from ln A matters for the phase.
  const double phase = w.tau * (lu - w.log_a);
  const cplx upper = std::exp((beta - 1.0) * lu) * std::polar(1.0, phase) / c;
  const cplx lower = std::exp((beta - 1.0) * w.log_a) / c;
  return w.tau * (upper - lower).real();
}

inline double template_psi(const TemplateZetaParams& p, double x, int k_max = -1) {
  require(x >= 1.0, ErrorCode::InvalidArgument, "template_psi needs x >= 1");
  const auto ws = truncate_windows(template_windows(p), k_max);
  NeumaierSum s;
  s.add(x);
  s.add(-std::log(x));
  s.add(-1.0);
  for (const auto& w : ws) s.add(template_r(w, p.beta, x));
  return s.value();
}

/// Density of d psi_C with respect to du.
inline double template_density(const TemplateZetaParams& p, double u, int k_max = -1) {
  if (u < 1.0) return 0.0;
  const auto ws = truncate_windows(template_windows(p), k_max);
  const double lu = std::log(u);
  double d = 1.0 - 1.0 / u;
  for (const auto& w : ws)
    if (lu >= w.log_a && lu < w.log_b)
      d += w.tau * std::cos(w.tau * (lu - w.log_a)) * std::exp((p.beta - 2.0) * lu);
  return d;
}

namespace detail {
// v^{beta-1-s} for v = A_k or B_k, using tau_k ln v in 2 pi Z to shorten the phase.
inline cplx window_power(double log_v, double beta, cplx s, double tau) {
  const double phase = -(s.imag() - tau) * log_v;
  return std::exp((beta - 1.0 - s.real()) * log_v) * std::polar(1.0, phase);
}
}  // namespace detail

/// eta_k(s) = int u^{-s} dR_k(u)
///          = tau_k/2 (B^{beta-1-s} - A^{beta-1-s}) (1/(beta-1-s+i tau_k) + 1/(beta-1-s-i tau_k)).
inline cplx template_eta(const TemplateWindow& w, double beta, cplx s) {
  const cplx base = cplx(beta - 1.0, 0.0) - s;
  const cplx d1 = base + cplx(0.0, w.tau);
  const cplx d2 = base - cplx(0.0, w.tau);
  if (std::abs(d1) < 1e-8 || std::abs(d2) < 1e-8)
    throw Error(ErrorCode::PoleProximity, "s within 1e-8 of a template pole");
  const cplx pa = detail::window_power(w.log_a, beta, s, w.tau);
  const cplx pb = detail::window_power(w.log_b, beta, s, w.tau);
  return 0.5 * w.tau * (pb - pa) * (1.0 / d1 + 1.0 / d2);
}

/// -zeta_C'/zeta_C(s) = 1/(s-1) - 1/s + sum_{k <= k_max} eta_k(s).
inline cplx template_logderiv(const TemplateZetaParams& p, cplx s, int k_max = -1) {
  if (std::abs(s - 1.0) < 1e-8 || std::abs(s) < 1e-8)
    throw Error(ErrorCode::PoleProximity, "s within 1e-8 of 0 or 1");
  const auto ws = truncate_windows(template_windows(p), k_max);
  ComplexSum acc;
  acc.add(1.0 / (s - 1.0));
  acc.add(-1.0 / s);
  for (const auto& w : ws) acc.add(template_eta(w, p.beta, s));
  return acc.value();
}

/// int_1^x u^{-it} d psi_C(u), in closed form.
inline cplx template_mellin_partial(const TemplateZetaParams& p, double x, double t, int k_max = -1) {
  const auto ws = truncate_windows(template_windows(p), k_max);
  const double lx = std::log(x);
  ComplexSum acc;
  if (t == 0.0) {
    acc.add(x - 1.0 - lx);
  } else {
    const cplx a(1.0, -t);
    acc.add((std::exp(a * lx) - 1.0) / a);
    const cplx b(0.0, -t);
    acc.add(-(std::exp(b * lx) - 1.0) / b);
  }
  for (const auto& w : ws) {
    if (lx <= w.log_a) continue;
    const double hi = std::min(lx, w.log_b);
    for (int sgn : {1, -1}) {
      const cplx c(p.beta - 1.0, -t + sgn * w.tau);
      // exp(c v) with the tau part of the phase measured from ln A.
      auto ev = [&](double v) {
        return std::exp((p.beta - 1.0) * v) *
               std::polar(1.0, -t * v + sgn * w.tau * (v - w.log_a));
      };
      acc.add(0.5 * w.tau * (ev(hi) - ev(w.log_a)) / c);
    }
  }
  return acc.value();
}

}  // namespace llab::zeta
