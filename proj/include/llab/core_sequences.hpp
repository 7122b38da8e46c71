#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "llab/error.hpp"
#include "llab/io.hpp"
#include "llab/mean_model.hpp"
#include "llab/numeric.hpp"
#include "llab/sequence.hpp"

namespace llab {

struct ExpSumResult {
  cplx value;
  std::int64_t terms_used = 0;
  double est_roundoff = 0.0;
};

namespace detail {
inline constexpr std::size_t kSumChunk = 1 << 15;

inline ExpSumResult exp_sum_range(const PointSequence& seq, std::size_t lo, std::size_t hi, double t) {
  ComplexSum s;
  double err = 0.0;
  std::int64_t terms = 0;
  const auto& logs = seq.logs();
  const auto& mult = seq.multiplicities();
  for (std::size_t i = lo; i < hi; ++i) {
    const double ph = -t * logs[i];
    const double m = static_cast<double>(mult[i]);
    s.add(cplx(m * std::cos(ph), m * std::sin(ph)));
    // phase error |t| ulp(ln n) plus the rounding of the product and of sin/cos
    err += m * (std::abs(ph) * 2.0 * kUnitRoundoff + 4.0 * kUnitRoundoff);
    terms += mult[i];
  }
  return {s.value(), terms, err};
}
}  // namespace detail

/// S(x, t) = sum over points <= x of n^{-it}, with Neumaier summation in fixed chunks.
inline ExpSumResult exp_sum(const PointSequence& seq, double x, double t) {
  require(std::isfinite(t), ErrorCode::InvalidArgument, "t must be finite");
  const std::size_t n = seq.index_upto(x);
  if (t == 0.0) {
    const std::int64_t c = seq.prefix(n);
    return {cplx(static_cast<double>(c), 0.0), c, 0.0};
  }
  const std::size_t chunks = (n + detail::kSumChunk - 1) / detail::kSumChunk;
  std::vector<ExpSumResult> parts(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    parts[c] = detail::exp_sum_range(seq, c * detail::kSumChunk, std::min(n, (c + 1) * detail::kSumChunk), t);
  });
  ComplexSum s;
  ExpSumResult r;
  for (const auto& p : parts) {
    s.add(p.value);
    r.terms_used += p.terms_used;
    r.est_roundoff += p.est_roundoff;
  }
  r.value = s.value();
  r.est_roundoff += 2.0 * kUnitRoundoff * static_cast<double>(chunks) * static_cast<double>(r.terms_used);
  return r;
}

inline std::int64_t counting(const PointSequence& seq, double x) { return seq.counting(x); }

inline Estimate main_term(const MeanModel& model, double x, double t, double rel_tol = 1e-10) {
  require(x >= model.x0(), ErrorCode::InvalidArgument, "main_term needs x >= x0");
  return model.main_term(x, t, rel_tol);
}

// ---------------------------------------------------------------------------
// Deviation statistics.

enum class Norm {
  LhEps,        // sqrt(M(x)) |t|^eps
  ProbBound,    // sqrt(M(x)) (sqrt(log(x+1)) + sqrt(log(|t|+1))) log(x+1)
  LhTilde,      // |S| against N(x)^{1/2} |t|^eps
  ProbJitter,   // sqrt(M(x)) (sqrt(log(x+1)) + sqrt(log(|t|+1))) + x^theta + x^{1-theta}
};

inline std::string norm_name(Norm n) {
  switch (n) {
    case Norm::LhEps: return "LH_EPS";
    case Norm::ProbBound: return "PROB_BOUND";
    case Norm::LhTilde: return "LH_TILDE";
    case Norm::ProbJitter: return "PROB_JITTER";
  }
  return "?";
}

inline Norm parse_norm(const std::string& s) {
  if (s == "LH_EPS") return Norm::LhEps;
  if (s == "PROB_BOUND") return Norm::ProbBound;
  if (s == "LH_TILDE") return Norm::LhTilde;
  if (s == "PROB_JITTER") return Norm::ProbJitter;
  throw Error(ErrorCode::InvalidArgument, "unknown normalization '" + s + "'");
}

struct NormSpec {
  Norm kind = Norm::LhEps;
  double eps = 0.0;     // LH_EPS, LH_TILDE
  double theta = 0.5;   // PROB_JITTER
};

struct DeviationResult {
  double raw = 0.0;
  double normalized = 0.0;
  double normalizer = 0.0;
  ExpSumResult sum;
  Estimate main;
};

inline double normalizer(const NormSpec& n, double m_or_count, double x, double t) {
  const double at = std::abs(t);
  switch (n.kind) {
    case Norm::LhEps:
    case Norm::LhTilde:
      return std::sqrt(m_or_count) * std::pow(at, n.eps);
    case Norm::ProbBound:
      return std::sqrt(m_or_count) * (std::sqrt(std::log(x + 1.0)) + std::sqrt(std::log(at + 1.0))) *
             std::log(x + 1.0);
    case Norm::ProbJitter:
      return std::sqrt(m_or_count) * (std::sqrt(std::log(x + 1.0)) + std::sqrt(std::log(at + 1.0))) +
             std::pow(x, n.theta) + std::pow(x, 1.0 - n.theta);
  }
  return 0.0;
}

inline DeviationResult deviation(const PointSequence& seq, const MeanModel& model, double x, double t,
                                 const NormSpec& norm) {
  require(x >= model.x0(), ErrorCode::InvalidArgument, "deviation needs x >= x0");
  if (norm.kind == Norm::LhEps)
    require(std::abs(t) > 1.0, ErrorCode::InvalidArgument, "LH_EPS needs |t| > 1");
  DeviationResult r;
  r.sum = exp_sum(seq, x, t);
  double scale;
  if (norm.kind == Norm::LhTilde) {
    r.raw = std::abs(r.sum.value);
    scale = static_cast<double>(seq.counting(x));
  } else {
    r.main = model.main_term(x, t);
    r.raw = std::abs(r.sum.value - r.main.value);
    scale = model.evaluate(x);
  }
  r.normalizer = normalizer(norm, scale, x, t);
  if (!(r.normalizer > 1e-300))
    throw Error(ErrorCode::DivisionDegenerate, "normalizer vanishes at x=" + io::format_real(x));
  r.normalized = r.raw / r.normalizer;
  return r;
}

// ---------------------------------------------------------------------------
// Grid scans.

struct TRule {
  std::vector<double> t_values;  // used for every x
  std::optional<double> power;   // t = x^power otherwise

  static TRule explicit_list(std::vector<double> ts) { return {std::move(ts), std::nullopt}; }
  static TRule from_power(double p) { return {{}, p}; }
};

struct DeviationEntry {
  double x = 0.0;
  double t = 0.0;
  double raw = std::nan("");
  double normalized = std::nan("");
  std::string error;  // empty when the point evaluated cleanly
};

struct DeviationGrid {
  std::vector<DeviationEntry> entries;
  NormSpec norm;

  std::string to_csv() const {
    std::string out = "x,t,raw_dev,normalized_dev,norm,eps\n";
    for (const auto& e : entries) {
      out += io::format_real(e.x) + ',' + io::format_real(e.t) + ',' + io::format_real(e.raw) + ',' +
             io::format_real(e.normalized) + ',' + norm_name(norm.kind) + ',' + io::format_real(norm.eps) + '\n';
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["norm"] = norm_name(norm.kind);
    j["eps"] = norm.eps;
    if (norm.kind == Norm::ProbJitter) j["theta"] = norm.theta;
    auto& arr = j["entries"] = nlohmann::json::array();
    for (const auto& e : entries) {
      nlohmann::json row{{"x", e.x}, {"t", e.t}};
      if (e.error.empty()) {
        row["raw_dev"] = e.raw;
        row["normalized_dev"] = e.normalized;
      } else {
        row["error"] = e.error;
      }
      arr.push_back(std::move(row));
    }
    return j;
  }
};

inline DeviationGrid scan(const PointSequence& seq, const MeanModel& model, const std::vector<double>& x_grid,
                          const TRule& rule, const NormSpec& norm) {
  require(!x_grid.empty(), ErrorCode::InvalidGrid, "x grid is empty");
  require(rule.power.has_value() || !rule.t_values.empty(), ErrorCode::InvalidGrid, "t list is empty");
  DeviationGrid g;
  g.norm = norm;
  for (double x : x_grid) {
    require(std::isfinite(x) && x > 0.0, ErrorCode::InvalidGrid, "grid values must be positive");
    if (rule.power)
      g.entries.push_back({x, std::pow(x, *rule.power), std::nan(""), std::nan(""), {}});
    else
      for (double t : rule.t_values) g.entries.push_back({x, t, std::nan(""), std::nan(""), {}});
  }
  std::sort(g.entries.begin(), g.entries.end(),
            [](const auto& a, const auto& b) { return a.x < b.x || (a.x == b.x && a.t < b.t); });
  parallel_for(g.entries.size(), [&](std::size_t i) {
    auto& e = g.entries[i];
    try {
      require(e.x <= seq.cutoff(), ErrorCode::InvalidGrid, "x beyond the sequence cutoff");
      auto d = deviation(seq, model, e.x, e.t, norm);
      e.raw = d.raw;
      e.normalized = d.normalized;
    } catch (const Error& err) {
      e.error = std::string(err.name());
    }
  });
  return g;
}

}  // namespace llab
