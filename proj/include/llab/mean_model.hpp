#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "llab/error.hpp"
#include "llab/numeric.hpp"
#include "llab/template_zeta.hpp"

namespace llab {

/// Integral together with an absolute error estimate.
struct Estimate {
  cplx value;
  double abs_error = 0.0;
};

namespace models {

struct Linear {
  double slope = 1.0;
  double x0 = 0.0;
};

/// Li(x) = int_1^x (1 - 1/u) / ln u du.
struct LogIntegral {};

/// int_1^x (1 - u^{a-1}) / ln u du, a in [0, 1).
struct ShiftedLogIntegral {
  double a = 0.0;
};

/// Right-continuous step function with jumps at increasing positions.
struct TabulatedStep {
  std::vector<double> positions;
  std::vector<double> jumps;
  std::vector<double> cumulative;
  double x0 = 0.0;
};

/// Sum of normalised bumps exp(-1/(1-v^2)) of half-width 1/lambda_j around each point.
/// Bumps narrower than one ulp of their centre are kept as point masses.
struct MollifiedComb {
  std::vector<double> centers;
  std::vector<std::int64_t> mass;
  std::vector<double> log_lambda;
  std::vector<char> point_mass;
  double max_halfwidth = 0.0;
};

struct TemplateChebyshev {
  zeta::TemplateZetaParams params;
  int k_max = -1;
};

}  // namespace models

namespace detail {

inline double bump(double v) {
  if (v <= -1.0 || v >= 1.0) return 0.0;
  return std::exp(-1.0 / ((1.0 - v) * (1.0 + v)));
}

inline double bump_mass() {
  static const double z = integrate([](double v) { return bump(v); }, -1.0, 1.0, {1e-15, 0.0}).value;
  return z;
}

/// Mass of the normalised bump on [-1, v].
inline double bump_cdf(double v) {
  if (v <= -1.0) return 0.0;
  if (v >= 1.0) return 1.0;
  if (v <= 0.0)
    return integrate([](double u) { return bump(u); }, -1.0, v, {1e-14, 1e-300}).value / bump_mass();
  return 1.0 - integrate([](double u) { return bump(u); }, v, 1.0, {1e-14, 1e-300}).value / bump_mass();
}

}  // namespace detail

/// A non-decreasing mean function M supported on [x0, inf) with M(x0) = 0.
class MeanModel {
 public:
  using Kind = std::variant<models::Linear, models::LogIntegral, models::ShiftedLogIntegral,
                            models::TabulatedStep, models::MollifiedComb, models::TemplateChebyshev>;

  explicit MeanModel(Kind k) : kind_(std::move(k)) { validate(); }

  static MeanModel linear(double slope, double x0 = 0.0) { return MeanModel(models::Linear{slope, x0}); }
  static MeanModel log_integral() { return MeanModel(models::LogIntegral{}); }
  static MeanModel shifted_log_integral(double a) { return MeanModel(models::ShiftedLogIntegral{a}); }
  static MeanModel template_chebyshev(zeta::TemplateZetaParams p, int k_max = -1) {
    return MeanModel(models::TemplateChebyshev{std::move(p), k_max});
  }

  static MeanModel tabulated(std::vector<double> positions, std::vector<double> jumps, double x0) {
    models::TabulatedStep s{std::move(positions), std::move(jumps), {}, x0};
    return MeanModel(std::move(s));
  }

  /// M(x) = (1/k) floor(x - k + 1) for x >= k - 1, tabulated up to x_max.
  static MeanModel floor_step(int k, double x_max) {
    require(k >= 1, ErrorCode::InvalidArgument, "floor_step needs k >= 1");
    std::vector<double> pos, jump;
    for (double p = k; p <= x_max; p += 1.0) {
      pos.push_back(p);
      jump.push_back(1.0 / k);
    }
    return tabulated(std::move(pos), std::move(jump), k - 1.0);
  }

  const Kind& kind() const { return kind_; }

  std::string name() const {
    return std::visit(
        [](const auto& m) -> std::string {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, models::Linear>) return "linear";
          if constexpr (std::is_same_v<M, models::LogIntegral>) return "log_integral";
          if constexpr (std::is_same_v<M, models::ShiftedLogIntegral>) return "shifted_log_integral";
          if constexpr (std::is_same_v<M, models::TabulatedStep>) return "tabulated_step";
          if constexpr (std::is_same_v<M, models::MollifiedComb>) return "mollified_comb";
          if constexpr (std::is_same_v<M, models::TemplateChebyshev>) return "template_chebyshev";
        },
        kind_);
  }

  double x0() const {
    return std::visit(
        [](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, models::Linear>) return m.x0;
          if constexpr (std::is_same_v<M, models::TabulatedStep>) return m.x0;
          if constexpr (std::is_same_v<M, models::MollifiedComb>)
            return m.centers.empty() ? 0.0 : m.centers.front() - std::exp(-m.log_lambda.front());
          return 1.0;
        },
        kind_);
  }

  bool continuous() const {
    return !std::holds_alternative<models::TabulatedStep>(kind_) &&
           !std::holds_alternative<models::MollifiedComb>(kind_);
  }

  /// Largest x at which the model is defined (finite for tables).
  double domain_end() const {
    if (auto* s = std::get_if<models::TabulatedStep>(&kind_))
      return s->positions.empty() ? s->x0 : s->positions.back();
    return HUGE_VAL;
  }

  double evaluate(double x) const {
    if (x <= x0()) return 0.0;
    return std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, models::Linear>) return m.slope * (x - m.x0);
          if constexpr (std::is_same_v<M, models::LogIntegral>) return llab::log_integral(x);
          if constexpr (std::is_same_v<M, models::ShiftedLogIntegral>) return llab::shifted_log_integral(x, m.a);
          if constexpr (std::is_same_v<M, models::TabulatedStep>) {
            const auto i = std::upper_bound(m.positions.begin(), m.positions.end(), x) - m.positions.begin();
            return i == 0 ? 0.0 : m.cumulative[static_cast<std::size_t>(i - 1)];
          }
          if constexpr (std::is_same_v<M, models::MollifiedComb>) return comb_mass(m, x);
          if constexpr (std::is_same_v<M, models::TemplateChebyshev>)
            return zeta::template_psi(m.params, x, m.k_max);
        },
        kind_);
  }

  /// M'(x) for continuous models.
  double density(double x) const {
    if (x <= x0()) return 0.0;
    return std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, models::Linear>) return m.slope;
          if constexpr (std::is_same_v<M, models::LogIntegral>) return (1.0 - 1.0 / x) / std::log(x);
          if constexpr (std::is_same_v<M, models::ShiftedLogIntegral>)
            return (1.0 - std::pow(x, m.a - 1.0)) / std::log(x);
          if constexpr (std::is_same_v<M, models::TemplateChebyshev>)
            return zeta::template_density(m.params, x, m.k_max);
          throw Error(ErrorCode::InvalidArgument, "density undefined for step models");
        },
        kind_);
  }

  /// Generalised inverse inf{x : M(x) >= y}, searched inside [lo, hi] when given.
  double inverse(double y, double lo = -1.0, double hi = -1.0) const {
    require(y >= 0.0 && std::isfinite(y), ErrorCode::InvalidArgument, "inverse needs finite y >= 0");
    if (y == 0.0) return x0();
    if (auto* l = std::get_if<models::Linear>(&kind_)) return l->x0 + y / l->slope;
    if (auto* s = std::get_if<models::TabulatedStep>(&kind_)) {
      const double tol = 1e-12 * std::max(1.0, y);
      const auto it = std::lower_bound(s->cumulative.begin(), s->cumulative.end(), y - tol);
      require(it != s->cumulative.end(), ErrorCode::InvalidArgument,
              "inverse beyond the end of the tabulated model");
      return s->positions[static_cast<std::size_t>(it - s->cumulative.begin())];
    }
    if (lo < 0.0) lo = x0();
    if (hi < 0.0) {
      hi = std::max(2.0 * lo, lo + 2.0);
      int guard = 0;
      while (evaluate(hi) < y) {
        lo = hi;
        hi *= 2.0;
        require(++guard < 2000, ErrorCode::RootfindFail, "could not bracket inverse");
      }
    }
    require(hi >= lo, ErrorCode::RootfindFail, "inverse bracket is empty");
    if (continuous() && !std::holds_alternative<models::TemplateChebyshev>(kind_))
      return newton_inverse(y, lo, hi);
    return bisect_increasing([&](double x) { return evaluate(x); }, y, lo, hi);
  }

  /// x_j = inf{x : M(x) >= j}.
  double quantile(double j) const { return inverse(j); }

  /// int_{x0}^{x} u^{-it} dM(u).
  Estimate main_term(double x, double t, double rel_tol = 1e-10) const {
    if (x <= x0()) return {cplx(0.0), 0.0};
    return std::visit([&](const auto& m) -> Estimate { return main_term_impl(m, x, t, rel_tol); }, kind_);
  }

 private:
  void validate() {
    std::visit(
        [](auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, models::Linear>) {
            require(m.slope > 0.0 && std::isfinite(m.slope), ErrorCode::InvalidArgument,
                    "linear model needs slope > 0");
            require(m.x0 >= 0.0, ErrorCode::InvalidArgument, "linear model needs x0 >= 0");
          }
          if constexpr (std::is_same_v<M, models::ShiftedLogIntegral>)
            require(m.a >= 0.0 && m.a < 1.0, ErrorCode::InvalidArgument, "shift a must lie in [0, 1)");
          if constexpr (std::is_same_v<M, models::TabulatedStep>) {
            require(m.positions.size() == m.jumps.size(), ErrorCode::InvalidArgument, "table size mismatch");
            m.cumulative.resize(m.jumps.size());
            NeumaierSum run;
            for (std::size_t i = 0; i < m.jumps.size(); ++i) {
              require(m.jumps[i] > 0.0, ErrorCode::InvalidArgument, "jumps must be positive");
              require(m.positions[i] > (i == 0 ? m.x0 : m.positions[i - 1]), ErrorCode::InvalidArgument,
                      "jump positions must increase and exceed x0");
              run.add(m.jumps[i]);
              m.cumulative[i] = run.value();
            }
          }
          if constexpr (std::is_same_v<M, models::TemplateChebyshev>) zeta::template_windows(m.params);
        },
        kind_);
  }

  double newton_inverse(double y, double lo, double hi) const {
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
      const double f = evaluate(x) - y;
      if (f >= 0.0)
        hi = x;
      else
        lo = x;
      const double d = density(x);
      double nx = d > 0.0 ? x - f / d : 0.5 * (lo + hi);
      if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
      if (std::abs(nx - x) <= 4.0 * kUnitRoundoff * std::abs(x) || hi - lo <= 4.0 * kUnitRoundoff * hi) {
        x = nx;
        break;
      }
      x = nx;
    }
    return x;
  }

  static double comb_mass(const models::MollifiedComb& m, double x) {
    const auto& c = m.centers;
    // Everything with centre + max_halfwidth <= x is fully counted.
    const auto full_end = std::upper_bound(c.begin(), c.end(), x - m.max_halfwidth) - c.begin();
    NeumaierSum s;
    for (std::ptrdiff_t i = 0; i < full_end; ++i) s.add(static_cast<double>(m.mass[static_cast<std::size_t>(i)]));
    for (auto i = static_cast<std::size_t>(full_end); i < c.size() && c[i] - m.max_halfwidth <= x; ++i) {
      if (m.point_mass[i]) {
        if (c[i] <= x) s.add(static_cast<double>(m.mass[i]));
        continue;
      }
      const double v = (x - c[i]) * std::exp(m.log_lambda[i]);
      s.add(static_cast<double>(m.mass[i]) * detail::bump_cdf(v));
    }
    return s.value();
  }

  static cplx upow(double u, double t) { return std::polar(1.0, -t * std::log(u)); }

  static Estimate main_term_impl(const models::Linear& m, double x, double t, double) {
    if (t == 0.0) return {cplx(m.slope * (x - m.x0)), 0.0};
    const cplx e(1.0, -t);
    const cplx hi = x * upow(x, t);
    const cplx lo = m.x0 > 0.0 ? m.x0 * upow(m.x0, t) : cplx(0.0);
    const double err = 4.0 * kUnitRoundoff * m.slope * (x + m.x0) * (1.0 + std::abs(t) * std::log(std::max(x, 2.0))) / std::abs(e);
    return {m.slope * (hi - lo) / e, err};
  }

  // In v = ln u both logarithmic models become int e^{-itv} g(v) dv with a smooth g.
  template <class G>
  static Estimate log_model_term(G g, double x, double t, double rel_tol) {
    const double y = std::log(x);
    QuadOptions o;
    o.rel_tol = rel_tol;
    o.initial_panels = oscillation_panels(0.0, y, t, 2);
    o.max_evals = std::max<std::size_t>(o.max_evals, 60 * o.initial_panels);
    auto r = integrate([&](double v) { return g(v) * std::polar(1.0, -t * v); }, 0.0, y, o);
    return {r.value, r.abs_error};
  }

  static Estimate main_term_impl(const models::LogIntegral&, double x, double t, double rel_tol) {
    return log_model_term([](double v) { return v == 0.0 ? 1.0 : std::expm1(v) / v; }, x, t, rel_tol);
  }

  static Estimate main_term_impl(const models::ShiftedLogIntegral& m, double x, double t, double rel_tol) {
    const double a = m.a;
    return log_model_term(
        [a](double v) { return v == 0.0 ? 1.0 - a : std::exp(a * v) * std::expm1((1.0 - a) * v) / v; }, x, t,
        rel_tol);
  }

  static Estimate main_term_impl(const models::TabulatedStep& m, double x, double t, double) {
    ComplexSum s;
    double err = 0.0;
    for (std::size_t i = 0; i < m.positions.size() && m.positions[i] <= x; ++i) {
      s.add(m.jumps[i] * upow(m.positions[i], t));
      err += m.jumps[i] * (std::abs(t) * std::abs(std::log(m.positions[i])) + 4.0) * kUnitRoundoff;
    }
    return {s.value(), err};
  }

  static Estimate main_term_impl(const models::MollifiedComb& m, double x, double t, double rel_tol) {
    ComplexSum s;
    NeumaierSum err;
    const double z = detail::bump_mass();
    for (std::size_t i = 0; i < m.centers.size(); ++i) {
      const double n = m.centers[i];
      const double w = std::exp(-m.log_lambda[i]);  // half width
      if (n - w > x) break;
      const double mass = static_cast<double>(m.mass[i]);
      const cplx base = upow(n, t);
      const double spread = std::abs(t) * w / n;  // bound on the phase variation across the bump
      if (m.point_mass[i] || spread < 1e-17) {
        if (n <= x || (!m.point_mass[i] && n - w < x)) {
          const double frac = m.point_mass[i] ? 1.0 : detail::bump_cdf((x - n) / w);
          s.add(mass * frac * base);
        }
        err.add(mass * (spread + 4.0 * kUnitRoundoff));
        continue;
      }
      const double vmax = std::min(1.0, (x - n) / w);
      QuadOptions o;
      o.rel_tol = rel_tol;
      o.abs_tol = 1e-16;
      auto r = integrate(
          [&](double v) {
            return detail::bump(v) * std::polar(1.0, -t * std::log1p(v * w / n));
          },
          -1.0, vmax, o);
      s.add(mass * base * r.value / z);
      err.add(mass * (r.abs_error / z + 4.0 * kUnitRoundoff));
    }
    return {s.value(), err.value()};
  }

  static Estimate main_term_impl(const models::TemplateChebyshev& m, double x, double t, double) {
    const cplx v = zeta::template_mellin_partial(m.params, x, t, m.k_max);
    return {v, 64.0 * kUnitRoundoff * (x + 1.0) * (1.0 + std::abs(t) * std::log(x))};
  }

  Kind kind_;
};

}  // namespace llab
