#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "llab/core_sequences.hpp"
#include "llab/error.hpp"
#include "llab/mean_model.hpp"
#include "llab/numeric.hpp"
#include "llab/sequence.hpp"

namespace llab {

/// One checked inequality at a witness point (x, t).
struct Witness {
  double x = 0.0;
  double t = 0.0;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

inline nlohmann::json certificate_json(const std::string& construction, const nlohmann::json& params,
                                       const std::vector<Witness>& ws) {
  nlohmann::json j{{"construction", construction}, {"params", params}};
  auto& arr = j["witnesses"] = nlohmann::json::array();
  for (const auto& w : ws)
    arr.push_back({{"x", w.x}, {"t", w.t}, {"value", w.value}, {"bound", w.bound}, {"pass", w.pass}});
  return j;
}

namespace detail {
inline cplx unit_phase(double n, double t) { return std::polar(1.0, -t * std::log(n)); }
}  // namespace detail

// ---------------------------------------------------------------------------
// Blocks of m consecutive integers [m j, m j + m) keeping k of them; inside a window
// (beta K, K] the kept offsets are the k with the largest +-Re n^{-2 pi i K}.

struct MkCertificate {
  std::int64_t K = 0;
  double t = 0.0;
  double x = 0.0;        // witness point, between the last kept point of block K and block K+1
  cplx S;                // sum over blocks j <= K
  double sign = 1.0;     // direction chosen from the sign of Re S over blocks <= beta K
  double re_S = 0.0;
  double lower_bound = 0.0;
  double c_measured = 0.0;  // |S| / (min(k, m-k)/m x)
  double block_gain = 0.0;  // smallest +-Re contribution of a window block
  bool pass = false;
};

struct MkResult {
  PointSequence seq;
  std::vector<MkCertificate> certificates;
  double alpha = 0.0;
  double beta = 0.0;
  double c = 0.0;
  int m = 3;
  int k = 1;
  nlohmann::json certificate() const;
};

namespace detail {

inline double window_beta(double alpha) { return 1.0 / (1.0 + alpha / (4.0 * kPi)); }

// max over offsets d < m and j in (beta K, K] of |t log(1 + d/(m j)) - t d/(m j)|.
inline double linearisation_error(int m, std::int64_t K, double beta) {
  const double t = kTwoPi * static_cast<double>(K);
  const double j = std::floor(beta * static_cast<double>(K)) + 1.0;
  const double r = (m - 1.0) / (m * j);
  return std::abs(t * (std::log1p(r) - r));
}

inline MkResult build_blocks(int m, int k, const std::vector<std::int64_t>& K_list, double alpha,
                             const std::vector<double>& prefix, bool closed_form_bound) {
  require(m >= 3 && k >= 1 && k < m, ErrorCode::InvalidArgument, "need 1 <= k < m, m >= 3");
  require(alpha > 0.0 && alpha < kPi / 6.0, ErrorCode::InvalidArgument, "alpha must lie in (0, pi/6)");
  require(!K_list.empty(), ErrorCode::InvalidArgument, "K list is empty");
  const double beta = window_beta(alpha);
  for (std::size_t v = 0; v < K_list.size(); ++v) {
    require(K_list[v] >= 1, ErrorCode::InvalidArgument, "K must be positive");
    if (v > 0)
      require(beta * static_cast<double>(K_list[v]) >= static_cast<double>(K_list[v - 1]), ErrorCode::WindowOverlap,
              "K=" + std::to_string(K_list[v]) + " needs K >= ceil(" + std::to_string(K_list[v - 1]) + "/beta)");
  }
  const double lin = linearisation_error(m, K_list.front(), beta);
  if (lin > alpha / 2.0)
    throw Error(ErrorCode::PreconditionKTooSmall, "phase linearisation error " + io::format_real(lin) +
                                                      " exceeds alpha/2 at K=" + std::to_string(K_list.front()));

  // prefix holds the kept points of the leading blocks, k per block, in block order.
  require(prefix.size() % static_cast<std::size_t>(k) == 0, ErrorCode::InvalidSequence,
          "prefix must fill whole blocks");
  const std::int64_t prefix_blocks = static_cast<std::int64_t>(prefix.size()) / k;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const double b = static_cast<double>(m) * static_cast<double>(i / static_cast<std::size_t>(k) + 1);
    require(prefix[i] >= b && prefix[i] < b + m && prefix[i] == std::floor(prefix[i]), ErrorCode::InvalidSequence,
            "prefix point " + io::format_real(prefix[i]) + " outside its block");
  }
  require(prefix_blocks <= static_cast<std::int64_t>(std::floor(beta * static_cast<double>(K_list.front()))),
          ErrorCode::WindowOverlap, "prefix reaches into the first window");

  const std::int64_t Kmax = K_list.back();
  // offsets[j-1] are the kept offsets of block j
  std::vector<std::vector<int>> offsets(static_cast<std::size_t>(Kmax));
  for (std::int64_t j = 1; j <= Kmax; ++j) {
    auto& o = offsets[static_cast<std::size_t>(j - 1)];
    if (j <= prefix_blocks) {
      for (int r = 0; r < k; ++r)
        o.push_back(static_cast<int>(prefix[static_cast<std::size_t>((j - 1) * k + r)]) - static_cast<int>(m * j));
    } else {
      for (int r = 0; r < k; ++r) o.push_back(r);
    }
  }

  auto block_sum = [&](std::int64_t j, double t) {
    cplx s = 0.0;
    for (int d : offsets[static_cast<std::size_t>(j - 1)])
      s += unit_phase(static_cast<double>(m * j + d), t);
    return s;
  };

  MkResult res;
  res.alpha = alpha;
  res.beta = beta;
  res.c = std::cos(alpha + kPi / 3.0);
  res.m = m;
  res.k = k;
  for (std::int64_t K : K_list) {
    const double t = kTwoPi * static_cast<double>(K);
    const auto lo = static_cast<std::int64_t>(std::floor(beta * static_cast<double>(K)));
    ComplexSum head;
    for (std::int64_t j = 1; j <= lo; ++j) head.add(block_sum(j, t));
    const double sign = head.value().real() >= 0.0 ? 1.0 : -1.0;
    double gain = HUGE_VAL;
    ComplexSum win;
    std::vector<std::pair<double, int>> cand(static_cast<std::size_t>(m));
    for (std::int64_t j = lo + 1; j <= K; ++j) {
      for (int d = 0; d < m; ++d)
        cand[static_cast<std::size_t>(d)] = {sign * unit_phase(static_cast<double>(m * j + d), t).real(), d};
      std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      auto& o = offsets[static_cast<std::size_t>(j - 1)];
      o.clear();
      for (int r = 0; r < k; ++r) o.push_back(cand[static_cast<std::size_t>(r)].second);
      std::sort(o.begin(), o.end());
      const cplx bs = block_sum(j, t);
      gain = std::min(gain, sign * bs.real());
      win.add(bs);
    }
    MkCertificate c;
    c.K = K;
    c.t = t;
    c.x = static_cast<double>(m) * static_cast<double>(K + 1) - 0.5;
    ComplexSum total;
    total.add(head.value());
    total.add(win.value());
    c.S = total.value();
    c.sign = sign;
    c.re_S = c.S.real();
    c.block_gain = gain;
    c.c_measured = std::abs(c.S) / (std::min(k, m - k) / static_cast<double>(m) * c.x);
    if (closed_form_bound) {
      c.lower_bound = (1.0 - beta) * res.c * static_cast<double>(K) - res.c;
    } else {
      // sign * Re S_K >= (blocks in window) * smallest block gain, since sign * Re S_{beta K} >= 0
      c.lower_bound = static_cast<double>(K - lo) * gain;
    }
    c.pass = sign * c.re_S >= c.lower_bound;
    res.certificates.push_back(c);
  }
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(Kmax) * static_cast<std::size_t>(k));
  for (std::int64_t j = 1; j <= Kmax; ++j)
    for (int d : offsets[static_cast<std::size_t>(j - 1)]) pts.push_back(static_cast<double>(m * j + d));
  res.seq = PointSequence::from_points(std::move(pts));
  // block Kmax+1 would start at m (Kmax+1), so everything below is final
  res.seq.set_cutoff(static_cast<double>(m) * static_cast<double>(Kmax + 1) - 0.5);
  return res;
}

}  // namespace detail

inline nlohmann::json MkResult::certificate() const {
  std::vector<Witness> ws;
  for (const auto& c : certificates) ws.push_back({c.x, c.t, std::abs(c.re_S), c.lower_bound, c.pass});
  nlohmann::json params{{"m", m}, {"k", k}, {"alpha", alpha}, {"beta", beta}, {"c", this->c}};
  auto& ks = params["K_list"] = nlohmann::json::array();
  auto& cm = params["c_measured"] = nlohmann::json::array();
  for (const auto& c : certificates) {
    ks.push_back(c.K);
    cm.push_back(c.c_measured);
  }
  return certificate_json(m == 3 && k == 1 ? "thm2" : "mk", params, ws);
}

/// n_j = 3j + delta_j, delta_j in {0, 1, 2}, with |Re S_{K, 2 pi K}| >= (1 - beta) c K - c at every K.
inline MkResult build_thm2(const std::vector<std::int64_t>& K_list, double alpha,
                           const std::optional<PointSequence>& seed_prefix = std::nullopt) {
  return detail::build_blocks(3, 1, K_list, alpha, seed_prefix ? seed_prefix->expanded() : std::vector<double>{},
                              true);
}

/// k of every m consecutive integers, N(x) = (k/m) x + O(1).
inline MkResult build_mk(int m, int k, const std::vector<std::int64_t>& K_list, double alpha) {
  return detail::build_blocks(m, k, K_list, alpha, {}, m == 3 && k == 1);
}

/// Tightest chain K_{v+1} = ceil(K_v / beta) starting at K_0.
inline std::vector<std::int64_t> chain_windows(std::int64_t K0, double alpha, std::size_t count) {
  const double beta = detail::window_beta(alpha);
  std::vector<std::int64_t> ks{K0};
  while (ks.size() < count) ks.push_back(static_cast<std::int64_t>(std::ceil(static_cast<double>(ks.back()) / beta)));
  return ks;
}

// ---------------------------------------------------------------------------
// Density-one deletions.

struct Density1Witness {
  std::int64_t M = 0;
  double eps = 0.0;
  std::int64_t m = 0, l = 0, k = 0, J = 0;
  double beta = 0.0;
  double t = 0.0;
  double x = 0.0;  // M / beta
  double S_abs = 0.0;
  double c_measured = 0.0;  // S_abs / (J l)
  double threshold = 0.0;   // 0.9 J l
  double direction = 0.0;   // arg of the kept sum outside the J blocks
  std::vector<std::int64_t> deleted;
  std::vector<int> deleted_per_block;
  double phase_error = 0.0;
  bool pass = false;
};

struct Density1Result {
  PointSequence seq;
  std::vector<Density1Witness> witnesses;
  double eps = 0.0;

  nlohmann::json certificate() const {
    std::vector<Witness> ws;
    nlohmann::json params{{"eps", eps}};
    auto& arr = params["blocks"] = nlohmann::json::array();
    for (const auto& w : witnesses) {
      ws.push_back({w.x, w.t, w.S_abs, w.threshold, w.pass});
      arr.push_back({{"M", w.M}, {"m", w.m}, {"l", w.l}, {"k", w.k}, {"J", w.J}, {"beta", w.beta},
                     {"c_measured", w.c_measured}, {"deleted", w.deleted.size()}});
    }
    return certificate_json("density1", params, ws);
  }
};

struct Density1Params {
  std::int64_t m, l, k, J;
  double beta, t;
};

inline Density1Params density1_params(std::int64_t M, double eps) {
  const double Md = static_cast<double>(M);
  Density1Params p{};
  p.m = static_cast<std::int64_t>(std::floor(std::pow(Md, 0.5 - eps)));
  p.l = static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(p.m), 1.0 - eps)));
  p.k = p.m - p.l;
  const double inv_beta = 1.0 + 1.0 / (8.0 * static_cast<double>(p.m));
  p.beta = 1.0 / inv_beta;
  p.J = static_cast<std::int64_t>(std::floor((inv_beta - 1.0) * Md / static_cast<double>(p.m)));
  p.t = kTwoPi * Md * inv_beta / static_cast<double>(p.m);
  return p;
}

/// Integers minus l (or l - 1) of every block I_j = [M + (j-1) m, M + j m), j <= J, for each M.
/// The kept arc in each block is centred where n^{-it} points along the sum of everything else
/// below M / beta, which is the proof's "without loss of generality" rotation made explicit.
inline Density1Result build_density1(const std::vector<std::int64_t>& M_list, double eps) {
  require(eps > 0.0 && eps < 0.25, ErrorCode::InvalidArgument, "eps must lie in (0, 1/4)");
  require(!M_list.empty(), ErrorCode::InvalidArgument, "M list is empty");
  std::vector<Density1Params> ps;
  for (std::size_t v = 0; v < M_list.size(); ++v) {
    ps.push_back(density1_params(M_list[v], eps));
    const auto& p = ps.back();
    require(p.m >= 2 && p.l >= 1 && p.J >= 1, ErrorCode::PreconditionMTooSmall,
            "M=" + std::to_string(M_list[v]) + " gives an empty construction");
    if (v > 0)
      require(static_cast<double>(M_list[v]) > std::ceil(static_cast<double>(M_list[v - 1]) / ps[v - 1].beta),
              ErrorCode::InvalidArgument, "M list must satisfy M_{v+1} > M_v / beta_v");
  }
  const double end = std::floor(static_cast<double>(M_list.back()) / ps.back().beta);
  const auto N = static_cast<std::int64_t>(end);
  std::vector<char> keep(static_cast<std::size_t>(N) + 1, 1);
  keep[0] = 0;

  Density1Result res;
  res.eps = eps;
  for (std::size_t v = 0; v < M_list.size(); ++v) {
    const std::int64_t M = M_list[v];
    const auto& p = ps[v];
    Density1Witness w;
    w.M = M;
    w.eps = eps;
    w.m = p.m;
    w.l = p.l;
    w.k = p.k;
    w.J = p.J;
    w.beta = p.beta;
    w.t = p.t;
    w.x = static_cast<double>(M) / p.beta;
    const auto top = static_cast<std::int64_t>(std::floor(w.x));

    // phase error of the linearisation over every block and offset
    double perr = 0.0;
    for (std::int64_t j = 1; j <= p.J; ++j) {
      const double base = static_cast<double>(M + (j - 1) * p.m);
      for (std::int64_t d = 0; d < p.m; ++d) {
        const double dd = static_cast<double>(d);
        perr = std::max(perr, std::abs(p.t * std::log1p(dd / base) - kTwoPi * dd / static_cast<double>(p.m)));
      }
    }
    w.phase_error = perr;
    if (perr > kTwoPi / (4.0 * static_cast<double>(p.m)))
      throw Error(ErrorCode::PreconditionMTooSmall, "phase error " + io::format_real(perr) + " exceeds 2pi/(4m) at M=" +
                                                        std::to_string(M));

    ComplexSum rest;
    for (std::int64_t n = 1; n < M; ++n)
      if (keep[static_cast<std::size_t>(n)]) rest.add(detail::unit_phase(static_cast<double>(n), p.t));
    for (std::int64_t n = M + p.J * p.m; n <= top; ++n) rest.add(detail::unit_phase(static_cast<double>(n), p.t));
    w.direction = std::arg(rest.value());
    const cplx rot = std::polar(1.0, -w.direction);

    ComplexSum blocks;
    const std::int64_t half = p.k / 2;
    for (std::int64_t j = 1; j <= p.J; ++j) {
      const std::int64_t base = M + (j - 1) * p.m;
      std::int64_t best = 0;
      double best_re = -HUGE_VAL;
      for (std::int64_t d = 0; d < p.m; ++d) {
        const double re = (detail::unit_phase(static_cast<double>(base + d), p.t) * rot).real();
        if (re > best_re) {
          best_re = re;
          best = d;
        }
      }
      std::vector<char> in_arc(static_cast<std::size_t>(p.m), 0);
      for (std::int64_t i = -half; i <= half; ++i) in_arc[static_cast<std::size_t>(((best + i) % p.m + p.m) % p.m)] = 1;
      int del = 0;
      for (std::int64_t d = 0; d < p.m; ++d) {
        if (in_arc[static_cast<std::size_t>(d)]) {
          blocks.add(detail::unit_phase(static_cast<double>(base + d), p.t));
        } else {
          keep[static_cast<std::size_t>(base + d)] = 0;
          w.deleted.push_back(base + d);
          ++del;
        }
      }
      w.deleted_per_block.push_back(del);
    }
    ComplexSum total;
    total.add(rest.value());
    total.add(blocks.value());
    w.S_abs = std::abs(total.value());
    w.c_measured = w.S_abs / static_cast<double>(p.J * p.l);
    w.threshold = 0.9 * static_cast<double>(p.J * p.l);
    w.pass = w.S_abs >= w.threshold;
    res.witnesses.push_back(std::move(w));
  }
  std::vector<double> v;
  std::vector<std::int64_t> mult;
  for (std::int64_t n = 1; n <= N; ++n)
    if (keep[static_cast<std::size_t>(n)]) {
      v.push_back(static_cast<double>(n));
      mult.push_back(1);
    }
  res.seq = PointSequence::from_atoms(std::move(v), std::move(mult));
  res.seq.set_cutoff(end + 0.5);
  return res;
}

// ---------------------------------------------------------------------------
// Perturbation inside boxes aligning every phase at one (x, t).

struct Box {
  double a, b;
};

struct PerturbResult {
  PointSequence seq;
  std::vector<double> points;  // n_j' in index order
  std::size_t j0 = 0;          // first moved index (1-based)
  std::size_t moved = 0;
  double distance = 0.0;       // sup_j |n_j - n_j'| / (b_j - a_j)
  double max_phase_error = 0.0;
  cplx S;                      // S'(x, t)
  cplx F;
  double guaranteed = 0.0;     // count - j0 - |F|
};

inline PerturbResult adversarial_perturb(const PointSequence& seq, const std::vector<Box>& boxes,
                                         const std::function<cplx(double, double)>& F, double eps, double x,
                                         double t) {
  require(eps > 0.0, ErrorCode::InvalidArgument, "eps must be positive");
  require(t > 0.0, ErrorCode::InvalidArgument, "t must be positive");
  const auto pts = seq.expanded();
  require(boxes.size() >= pts.size(), ErrorCode::InvalidArgument, "one box per point is required");
  for (std::size_t j = 0; j < pts.size(); ++j) {
    require(boxes[j].a > 0.0 && boxes[j].a < boxes[j].b, ErrorCode::InvalidArgument, "boxes need 0 < a < b");
    require(pts[j] >= boxes[j].a && pts[j] <= boxes[j].b, ErrorCode::InvalidSequence,
            "point " + std::to_string(j + 1) + " lies outside its box");
  }
  // j0: from here on every box is at most as wide as its left end
  std::size_t j0 = boxes.size();
  while (j0 > 0 && (boxes[j0 - 1].b - boxes[j0 - 1].a) <= boxes[j0 - 1].a) --j0;
  double wmin = HUGE_VAL;
  for (std::size_t j = 0; j < pts.size(); ++j)
    if (pts[j] <= x) wmin = std::min(wmin, boxes[j].b - boxes[j].a);
  if (wmin < HUGE_VAL && t < 4.0 * kPi * x / (eps * wmin))
    throw Error(ErrorCode::InfeasibleT, "t=" + io::format_real(t) + " below 4 pi x/(eps min width)=" +
                                            io::format_real(4.0 * kPi * x / (eps * wmin)));

  PerturbResult r;
  r.j0 = j0 + 1;
  r.F = F(x, t);
  const double target = r.F == cplx(0.0) ? 0.0 : -std::arg(r.F);
  r.points = pts;
  for (std::size_t j = j0; j < pts.size(); ++j) {
    const double n = pts[j];
    if (n > x) continue;
    const double w = boxes[j].b - boxes[j].a;
    const double reach = std::nextafter(eps * w, 0.0);
    const double up = std::min(reach, boxes[j].b - n);
    const double down = std::min(reach, n - boxes[j].a);
    // phase(n') = -t ln n'; required decrease d in [0, 2 pi) going up, or increase 2 pi - d going down
    double d = std::fmod(-t * std::log(n) - target, kTwoPi);
    if (d < 0.0) d += kTwoPi;
    const double need_up = n * std::expm1(d / t);
    const double need_down = -n * std::expm1(-(kTwoPi - d) / t);
    const bool up_ok = need_up <= up;
    const bool down_ok = need_down <= down;
    double np = n;
    if (d == 0.0) {
      np = n;
    } else if (up_ok && (n + need_up <= x || !down_ok)) {
      np = bisect_increasing([&](double u) { return t * std::log(u / n); }, d, n, n + up, 1e-17);
    } else if (down_ok) {
      np = bisect_increasing([&](double u) { return -t * std::log(n / u); }, -(kTwoPi - d), n - down, n, 1e-17);
    } else {
      throw Error(ErrorCode::InfeasibleT, "no phase-aligned position in box " + std::to_string(j + 1));
    }
    double err = std::remainder(-t * std::log(np) - target, kTwoPi);
    r.max_phase_error = std::max(r.max_phase_error, std::abs(err));
    r.distance = std::max(r.distance, std::abs(np - n) / w);
    r.points[j] = np;
    ++r.moved;
  }
  require(r.max_phase_error <= 1e-6, ErrorCode::InfeasibleT, "phase tolerance 1e-6 not reached");
  r.seq = PointSequence::from_points(r.points);
  r.seq.set_cutoff(seq.cutoff());
  r.S = exp_sum(r.seq, x, t).value;
  r.guaranteed = static_cast<double>(seq.counting(x)) - static_cast<double>(j0) - std::abs(r.F);
  return r;
}

/// The sup metric d(N, N') = sup_j |n_j - n_j'| / (b_j - a_j).
inline double box_distance(const std::vector<double>& a, const std::vector<double>& b, const std::vector<Box>& boxes) {
  require(a.size() == b.size() && boxes.size() >= a.size(), ErrorCode::InvalidArgument, "size mismatch");
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]) / (boxes[j].b - boxes[j].a));
  return d;
}

// ---------------------------------------------------------------------------
// Mollified mean: M' = sum of unit-mass bumps of half width 1/lambda_j at the points.

struct ClusterReport {
  double worst_ratio = 0.0;  // max over points of count / sqrt(x)
  double at = 0.0;
};

/// Counts in [x - e^{-c x}, x + e^{-c x}] around every point, relative to sqrt(x).
inline ClusterReport cluster_check(const PointSequence& seq, double c) {
  ClusterReport r;
  const auto& v = seq.values();
  for (double x : v) {
    const double h = std::exp(-c * x);
    const double cnt = static_cast<double>(seq.counting(x + h) - seq.counting(std::nextafter(x - h, 0.0)));
    const double ratio = cnt / std::sqrt(x);
    if (ratio > r.worst_ratio) {
      r.worst_ratio = ratio;
      r.at = x;
    }
  }
  return r;
}

/// lambda_j = min(e^{C n_j}, e^{log_lambda_cap}); bumps narrower than the floating spacing at
/// n_j become point masses. Requires C >= max(1, 2c) and window counts <= c1 sqrt(x).
inline MeanModel mollified_mean(const PointSequence& seq, double C, double log_lambda_cap = 700.0,
                                double c = -1.0, double c1 = 1.0) {
  require(!seq.empty(), ErrorCode::InvalidSequence, "sequence is empty");
  if (c < 0.0) c = C / 2.0;
  require(C >= std::max(1.0, 2.0 * c), ErrorCode::InvalidArgument, "need C >= max(1, 2c)");
  require(log_lambda_cap > 0.0, ErrorCode::InvalidArgument, "lambda cap must exceed 1");
  const auto cl = cluster_check(seq, c);
  if (cl.worst_ratio > c1)
    throw Error(ErrorCode::ClusterViolation, "window count " + io::format_real(cl.worst_ratio) + " sqrt(x) at x=" +
                                                 io::format_real(cl.at) + " exceeds c1=" + io::format_real(c1));
  models::MollifiedComb mc;
  const auto& v = seq.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double ll = std::min(C * v[i], log_lambda_cap);
    const double w = std::exp(-ll);
    const bool point = w < std::nextafter(v[i], HUGE_VAL) - v[i];
    mc.centers.push_back(v[i]);
    mc.mass.push_back(seq.multiplicities()[i]);
    mc.log_lambda.push_back(ll);
    mc.point_mass.push_back(point ? 1 : 0);
    if (!point) mc.max_halfwidth = std::max(mc.max_halfwidth, w);
  }
  return MeanModel(std::move(mc));
}

}  // namespace llab
