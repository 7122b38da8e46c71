#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "llab/core_sequences.hpp"
#include "llab/error.hpp"
#include "llab/io.hpp"
#include "llab/mean_model.hpp"
#include "llab/numeric.hpp"
#include "llab/rng.hpp"
#include "llab/sequence.hpp"

namespace llab {

// ---------------------------------------------------------------------------
// Mean models as JSON.

inline nlohmann::json model_to_json(const MeanModel& m) {
  nlohmann::json j;
  j["kind"] = m.name();
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, models::Linear>) {
          j["slope"] = k.slope;
          j["x0"] = k.x0;
        } else if constexpr (std::is_same_v<K, models::ShiftedLogIntegral>) {
          j["a"] = k.a;
        } else if constexpr (std::is_same_v<K, models::TabulatedStep>) {
          j["positions"] = k.positions;
          j["jumps"] = k.jumps;
          j["x0"] = k.x0;
        } else if constexpr (std::is_same_v<K, models::TemplateChebyshev>) {
          j["beta"] = k.params.beta;
          j["tau"] = k.params.tau;
          j["delta"] = k.params.delta;
          j["nu"] = k.params.nu;
          j["k_max"] = k.k_max;
        } else if constexpr (std::is_same_v<K, models::MollifiedComb>) {
          throw Error(ErrorCode::ConfigInvalid, "mollified models are rebuilt from their sequence");
        }
      },
      m.kind());
  return j;
}

inline MeanModel model_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear") return MeanModel::linear(j.value("slope", 1.0), j.value("x0", 0.0));
    if (kind == "log_integral") return MeanModel::log_integral();
    if (kind == "shifted_log_integral") return MeanModel::shifted_log_integral(j.at("a").get<double>());
    if (kind == "floor_step") return MeanModel::floor_step(j.at("k").get<int>(), j.at("x_max").get<double>());
    if (kind == "tabulated_step")
      return MeanModel::tabulated(j.at("positions").get<std::vector<double>>(),
                                  j.at("jumps").get<std::vector<double>>(), j.value("x0", 0.0));
    if (kind == "template_chebyshev") {
      zeta::TemplateZetaParams p = zeta::TemplateZetaParams::defaults(j.value("beta", 0.75), j.value("k", 6));
      if (j.contains("tau")) {
        p.tau = j.at("tau").get<std::vector<double>>();
        p.delta = j.at("delta").get<std::vector<double>>();
        p.nu = j.at("nu").get<std::vector<double>>();
      }
      return MeanModel::template_chebyshev(std::move(p), j.value("k_max", -1));
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("model: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Quantile points x_j = inf{x : M(x) >= j}.

inline std::vector<double> quantiles_of(const MeanModel& model, std::int64_t J) {
  require(J >= 1, ErrorCode::InvalidArgument, "J must be >= 1");
  if (!std::isinf(model.domain_end()))
    require(model.evaluate(model.domain_end()) >= static_cast<double>(J) * (1.0 - 1e-12), ErrorCode::RootfindFail,
            "model mass " + io::format_real(model.evaluate(model.domain_end())) + " is below J");
  std::vector<double> xs(static_cast<std::size_t>(J));
  parallel_for(xs.size(), [&](std::size_t i) {
    const double j = static_cast<double>(i + 1);
    const double x = model.quantile(j);
    if (model.continuous())
      require(std::abs(model.evaluate(x) - j) <= 1e-12 * j + 64.0 * kUnitRoundoff * j, ErrorCode::RootfindFail,
              "quantile " + io::format_real(j) + " not resolved");
    xs[i] = x;
  });
  return xs;
}

// ---------------------------------------------------------------------------
// Samplers.

enum class SamplerKind { Thm5, Thm5Block, Thm7 };

inline std::string sampler_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::Thm5: return "THM5";
    case SamplerKind::Thm5Block: return "THM5_BLOCK";
    case SamplerKind::Thm7: return "THM7";
  }
  return "?";
}

struct SamplerSpec {
  SamplerKind kind = SamplerKind::Thm5;
  std::optional<MeanModel> model;       // THM5, THM5_BLOCK
  std::vector<std::int64_t> block_ends;  // THM5_BLOCK: j_1 < j_2 < ... < j_L = J
  double block_c = 1.0;                  // THM5_BLOCK: j_l - j_{l-1} <= c sqrt(j_{l-1}) for l >= 2
  double A = 1.0, K = 1.0, theta = 0.5;  // THM7
  std::int64_t J = 0;
  std::uint64_t seed = 0;

  void validate() const {
    require(J >= 1, ErrorCode::InvalidArgument, "J must be >= 1");
    if (kind == SamplerKind::Thm7) {
      require(theta > 0.0 && theta < 1.0, ErrorCode::InvalidArgument, "THM7 needs 0 < theta < 1");
      require(A > 0.0 && K > 0.0, ErrorCode::InvalidArgument, "THM7 needs A, K > 0");
      return;
    }
    require(model.has_value(), ErrorCode::InvalidArgument, "THM5 samplers need a mean model");
    if (kind == SamplerKind::Thm5Block) {
      require(!block_ends.empty() && block_ends.back() == J, ErrorCode::InvalidArgument,
              "block ends must finish at J");
      std::int64_t prev = 0;
      for (std::size_t l = 0; l < block_ends.size(); ++l) {
        const std::int64_t e = block_ends[l];
        require(e > prev, ErrorCode::InvalidArgument, "block ends must increase");
        if (l > 0)
          require(static_cast<double>(e - prev) <= block_c * std::sqrt(static_cast<double>(prev)),
                  ErrorCode::InvalidArgument,
                  "block " + std::to_string(l + 1) + " violates j_l - j_{l-1} <= c sqrt(j_{l-1})");
        prev = e;
      }
    }
  }

  /// Model the sample is compared against.
  MeanModel comparison_model() const { return kind == SamplerKind::Thm7 ? MeanModel::linear(A, 0.0) : *model; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"kind", sampler_name(kind)}, {"J", J}, {"seed", seed}};
    if (kind == SamplerKind::Thm7) {
      j["A"] = A;
      j["K"] = K;
      j["theta"] = theta;
    } else {
      j["model"] = model_to_json(*model);
    }
    if (kind == SamplerKind::Thm5Block) {
      j["block_ends"] = block_ends;
      j["block_c"] = block_c;
    }
    return j;
  }

  static SamplerSpec from_json(const nlohmann::json& j) {
    SamplerSpec s;
    try {
      const std::string k = j.at("kind").get<std::string>();
      if (k == "THM5")
        s.kind = SamplerKind::Thm5;
      else if (k == "THM5_BLOCK")
        s.kind = SamplerKind::Thm5Block;
      else if (k == "THM7")
        s.kind = SamplerKind::Thm7;
      else
        throw Error(ErrorCode::ConfigInvalid, "unknown sampler kind '" + k + "'");
      s.J = j.at("J").get<std::int64_t>();
      s.seed = j.value("seed", std::uint64_t{0});
      if (s.kind == SamplerKind::Thm7) {
        s.A = j.value("A", 1.0);
        s.K = j.value("K", 1.0);
        s.theta = j.value("theta", 0.5);
      } else {
        s.model = model_from_json(j.at("model"));
      }
      if (s.kind == SamplerKind::Thm5Block) {
        s.block_ends = j.at("block_ends").get<std::vector<std::int64_t>>();
        s.block_c = j.value("block_c", 1.0);
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigInvalid, std::string("sampler: ") + e.what());
    }
    return s;
  }
};

/// Equal blocks of the given size after an initial block of length `first`.
inline std::vector<std::int64_t> uniform_blocks(std::int64_t J, std::int64_t first, std::int64_t size) {
  std::vector<std::int64_t> ends;
  for (std::int64_t e = std::min(first, J);; e = std::min(e + size, J)) {
    ends.push_back(e);
    if (e == J) break;
  }
  return ends;
}

namespace detail {

// Draw inside (lo, hi] with law dM, at level y in (M(lo), M(hi)].
inline double draw_between(const MeanModel& m, double y, double lo, double hi) {
  double x;
  if (auto* lin = std::get_if<models::Linear>(&m.kind()))
    x = lin->x0 + y / lin->slope;
  else
    x = m.inverse(y, lo, hi);
  if (m.continuous()) x = std::clamp(x, std::nextafter(lo, HUGE_VAL), hi);
  return x;
}

}  // namespace detail

/// One draw of the sequence. Point j depends only on (seed, j, trial).
inline PointSequence sample(const SamplerSpec& spec, std::uint64_t trial = 0) {
  spec.validate();
  const CounterRng rng(spec.seed);
  const auto stream = static_cast<std::uint32_t>(trial);
  const auto J = static_cast<std::size_t>(spec.J);
  std::vector<double> pts(J);

  if (spec.kind == SamplerKind::Thm7) {
    parallel_for(J, [&](std::size_t i) {
      const double j = static_cast<double>(i + 1);
      const double half = spec.K * std::pow(j, spec.theta);
      const double hi = j / spec.A + half;
      const double lo = std::max(0.0, j / spec.A - half);
      pts[i] = std::max(lo + rng.uniform(i, stream) * (hi - lo), std::nextafter(lo, HUGE_VAL));
    });
    auto seq = PointSequence::from_points(std::move(pts));
    const double Jd = static_cast<double>(spec.J);
    seq.set_cutoff(std::max(0.0, Jd / spec.A - spec.K * std::pow(Jd, spec.theta)));
    return seq;
  }

  const MeanModel& m = *spec.model;
  const auto xs = quantiles_of(m, spec.J);
  auto xq = [&](std::int64_t j) { return j == 0 ? m.x0() : xs[static_cast<std::size_t>(j - 1)]; };

  if (spec.kind == SamplerKind::Thm5) {
    parallel_for(J, [&](std::size_t i) {
      const auto j = static_cast<std::int64_t>(i + 1);
      const double y = static_cast<double>(j - 1) + rng.uniform(i, stream);
      pts[i] = detail::draw_between(m, y, xq(j - 1), xq(j));
    });
  } else {
    std::int64_t start = 0;
    for (std::int64_t end : spec.block_ends) {
      const double width = static_cast<double>(end - start);
      parallel_for(static_cast<std::size_t>(end - start), [&](std::size_t r) {
        const std::size_t i = static_cast<std::size_t>(start) + r;
        const double y = static_cast<double>(start) + rng.uniform(i, stream) * width;
        pts[i] = detail::draw_between(m, y, xq(start), xq(end));
      });
      start = end;
    }
  }
  auto seq = PointSequence::from_points(std::move(pts));
  seq.set_cutoff(xs.back());
  return seq;
}

// ---------------------------------------------------------------------------
// The density f(u) = (1/2K) sum_{j : u in I_j} j^{-theta}, I_j = (j - K j^theta, j + K j^theta].

namespace detail {
inline bool in_jitter_interval(double u, double j, double K, double theta) {
  const double h = K * std::pow(j, theta);
  return u > std::max(0.0, j - h) && u <= j + h;
}

// First index from which j - K j^theta is increasing.
inline double jitter_monotone_start(double K, double theta) {
  return std::max(1.0, std::ceil(std::pow(K * theta, 1.0 / (1.0 - theta))));
}
}  // namespace detail

inline double f_density(double u, double K, double theta) {
  require(u > 0.0, ErrorCode::InvalidArgument, "f_density needs u > 0");
  require(K > 0.0 && theta > 0.0 && theta < 1.0, ErrorCode::InvalidArgument, "f_density needs K > 0, 0 < theta < 1");
  auto upper = [&](double j) { return j + K * std::pow(j, theta); };
  auto lower = [&](double j) { return j - K * std::pow(j, theta); };
  // L: largest j with upper(j) < u, so membership starts at L + 1.
  double lo = 0.0, hi = std::ceil(std::max(1.0, u));
  while (hi - lo > 1.0) {
    const double mid = std::floor(0.5 * (lo + hi));
    (upper(mid) < u ? lo : hi) = mid;
  }
  const double first = lo + 1.0;
  // M: largest j with lower(j) < u, searched where lower is increasing.
  const double j0 = detail::jitter_monotone_start(K, theta);
  double a = j0, b = std::ceil(std::max(j0, u) + 2.0 * K * std::pow(std::max(u, 1.0), theta) + 2.0);
  if (lower(a) >= u) {
    b = a;
  } else {
    while (b - a > 1.0) {
      const double mid = std::floor(0.5 * (a + b));
      (lower(mid) < u ? a : b) = mid;
    }
  }
  const double last = lower(b) < u ? b : a;
  NeumaierSum s;
  for (double j = first; j <= last; j += 1.0)
    if (detail::in_jitter_interval(u, j, K, theta)) s.add(std::pow(j, -theta));
  return s.value() / (2.0 * K);
}

/// F(x) = int_1^x f(u) du, summed interval by interval.
inline double f_integral(double x, double K, double theta) {
  require(x >= 1.0, ErrorCode::InvalidArgument, "f_integral needs x >= 1");
  NeumaierSum s;
  for (double j = 1.0;; j += 1.0) {
    const double h = K * std::pow(j, theta);
    const double a = std::max({0.0, j - h, 1.0});
    if (j - h >= x && j >= detail::jitter_monotone_start(K, theta)) break;
    const double b = std::min(x, j + h);
    if (b > a) s.add(std::pow(j, -theta) * (b - a));
  }
  return s.value() / (2.0 * K);
}

// ---------------------------------------------------------------------------
// Monte Carlo.

/// Hoeffding tail 4 / ((x_J + 1)^{C^2/2} (|t| + 1)^{C^2/2}).
inline double hoeffding_reference(double x_J, double t, double C) {
  const double e = 0.5 * C * C;
  return 4.0 * std::pow(x_J + 1.0, -e) * std::pow(std::abs(t) + 1.0, -e);
}

/// Type-7 empirical quantile of unsorted data.
inline double empirical_quantile(std::vector<double> v, double q) {
  require(!v.empty(), ErrorCode::InvalidArgument, "quantile of empty data");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (h - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

struct MonteCarloReport {
  SamplerSpec spec;
  std::int64_t trials = 0;
  std::vector<double> x_grid;
  std::vector<double> t_grid;
  NormSpec norm;
  std::vector<double> maxima;       // per trial, NaN when flagged
  std::vector<std::string> errors;  // per trial, empty when clean
  double q50 = 0.0, q90 = 0.0, q99 = 0.0;
  double hoeffding = 0.0;           // C = 2 at the smallest |t| of the grid

  nlohmann::json to_json() const {
    nlohmann::json j{{"schema", "monte_carlo"},
                     {"spec", spec.to_json()},
                     {"trials", trials},
                     {"x_grid", x_grid},
                     {"t_grid", t_grid},
                     {"norm", norm_name(norm.kind)},
                     {"eps", norm.eps},
                     {"theta", norm.theta},
                     {"quantiles", {{"q50", q50}, {"q90", q90}, {"q99", q99}}},
                     {"hoeffding_reference", hoeffding}};
    auto& arr = j["max_normalized_dev"] = nlohmann::json::array();
    for (std::size_t i = 0; i < maxima.size(); ++i) {
      if (errors[i].empty())
        arr.push_back(maxima[i]);
      else
        arr.push_back(errors[i]);
    }
    return j;
  }

  std::string to_csv() const {
    std::string out = "trial,max_normalized_dev,error\n";
    for (std::size_t i = 0; i < maxima.size(); ++i)
      out += std::to_string(i) + ',' + io::format_real(maxima[i]) + ',' + errors[i] + '\n';
    return out;
  }
};

/// Each trial draws a fresh sample (stream = trial index) and records the
/// largest normalized deviation over the grid.
inline MonteCarloReport monte_carlo(const SamplerSpec& spec, std::int64_t trials, const std::vector<double>& x_grid,
                                    const std::vector<double>& t_grid, const NormSpec& norm) {
  require(trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
  require(!x_grid.empty() && !t_grid.empty(), ErrorCode::InvalidGrid, "grids must be non-empty");
  spec.validate();
  const MeanModel model = spec.comparison_model();

  // Main terms and normalizers are the same in every trial.
  struct Point {
    double x, t;
    cplx main;
    double scale;
    double normalizer;
  };
  std::vector<Point> pts;
  for (double x : x_grid)
    for (double t : t_grid) {
      require(x >= model.x0(), ErrorCode::InvalidGrid, "grid x below the model support");
      if (norm.kind == Norm::LhEps) require(std::abs(t) > 1.0, ErrorCode::InvalidArgument, "LH_EPS needs |t| > 1");
      Point p{x, t, cplx(0.0), 0.0, 0.0};
      if (norm.kind != Norm::LhTilde) {
        p.main = model.main_term(x, t).value;
        p.scale = model.evaluate(x);
        p.normalizer = normalizer(norm, p.scale, x, t);
        require(p.normalizer > 1e-300, ErrorCode::DivisionDegenerate, "normalizer vanishes");
      }
      pts.push_back(p);
    }

  MonteCarloReport rep;
  rep.spec = spec;
  rep.trials = trials;
  rep.x_grid = x_grid;
  rep.t_grid = t_grid;
  rep.norm = norm;
  rep.maxima.assign(static_cast<std::size_t>(trials), std::nan(""));
  rep.errors.assign(static_cast<std::size_t>(trials), std::string());
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t tr) {
    try {
      const auto seq = sample(spec, tr);
      double best = 0.0;
      for (const auto& p : pts) {
        require(p.x <= seq.cutoff(), ErrorCode::InvalidGrid, "grid x beyond the sample cutoff");
        const cplx s = exp_sum(seq, p.x, p.t).value;
        double v;
        if (norm.kind == Norm::LhTilde)
          v = std::abs(s) / normalizer(norm, static_cast<double>(seq.counting(p.x)), p.x, p.t);
        else
          v = std::abs(s - p.main) / p.normalizer;
        best = std::max(best, v);
      }
      rep.maxima[tr] = best;
    } catch (const Error& e) {
      rep.errors[tr] = std::string(e.name());
    }
  });
  std::vector<double> clean;
  for (std::size_t i = 0; i < rep.maxima.size(); ++i)
    if (rep.errors[i].empty()) clean.push_back(rep.maxima[i]);
  if (!clean.empty()) {
    rep.q50 = empirical_quantile(clean, 0.50);
    rep.q90 = empirical_quantile(clean, 0.90);
    rep.q99 = empirical_quantile(clean, 0.99);
  }
  double tmin = HUGE_VAL;
  for (double t : t_grid) tmin = std::min(tmin, std::abs(t));
  const double xJ = spec.kind == SamplerKind::Thm7 ? static_cast<double>(spec.J) / spec.A
                                                   : spec.model->quantile(static_cast<double>(spec.J));
  rep.hoeffding = hoeffding_reference(xJ, tmin, 2.0);
  return rep;
}

}  // namespace llab
