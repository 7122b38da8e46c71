#include <gtest/gtest.h>

#include <cmath>

#include "llab/constructions.hpp"

using namespace llab;

namespace {
ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}
}  // namespace

TEST(Thm2, ConstantsForAlphaPiOver12) {
  auto r = build_thm2({10000}, kPi / 12.0);
  EXPECT_NEAR(r.beta, 48.0 / 49.0, 1e-15);
  EXPECT_NEAR(r.c, 0.25881904510252074, 1e-15);
  ASSERT_EQ(r.certificates.size(), 1u);
  EXPECT_NEAR(r.certificates[0].lower_bound, 10000.0 / 49.0 * r.c - r.c, 1e-9);
  EXPECT_NEAR(r.certificates[0].lower_bound, 52.56, 0.01);
  EXPECT_TRUE(r.certificates[0].pass);
  EXPECT_GE(std::abs(r.certificates[0].re_S), 52.56);
}

TEST(Thm2, OnePointPerBlockAndCountingWithinOne) {
  auto ks = chain_windows(200, kPi / 12.0, 6);
  auto r = build_thm2(ks, kPi / 12.0);
  const auto pts = r.seq.expanded();
  ASSERT_EQ(static_cast<std::int64_t>(pts.size()), ks.back());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = pts[i] - 3.0 * double(i + 1);
    EXPECT_TRUE(d == 0.0 || d == 1.0 || d == 2.0);
  }
  // within one at multiples of 3 and at the points; 5/3 in between (x just below 3j + 2, delta_j = 2)
  for (double x = 3.0; x <= r.seq.cutoff(); x += 3.0)
    EXPECT_LE(std::abs(double(r.seq.counting(x)) - x / 3.0), 1.0);
  for (double p : pts) EXPECT_LE(std::abs(double(r.seq.counting(p)) - p / 3.0), 1.0);
  for (double x = 1.0; x <= r.seq.cutoff(); x += 0.25)
    EXPECT_LE(std::abs(double(r.seq.counting(x)) - x / 3.0), 5.0 / 3.0);
  for (const auto& c : r.certificates) {
    EXPECT_TRUE(c.pass) << c.K;
    // recompute the witness sum directly
    const auto s = exp_sum(r.seq, c.x, c.t).value;
    EXPECT_NEAR(s.real(), c.re_S, 1e-8 * c.K);
  }
}

TEST(Thm2, DeviationAtWitnessesGrowsLinearly) {
  auto ks = chain_windows(2000, kPi / 12.0, 40);
  auto r = build_thm2(ks, kPi / 12.0);
  const auto m = MeanModel::linear(1.0 / 3.0);
  const auto& first = r.certificates.front();
  const auto& last = r.certificates.back();
  auto a = deviation(r.seq, m, first.x, first.t, {Norm::LhEps, 0.1});
  auto b = deviation(r.seq, m, last.x, last.t, {Norm::LhEps, 0.1});
  EXPECT_GT(b.normalized, a.normalized);
  EXPECT_GT(b.raw / last.x, 0.9 * (1.0 - r.beta) * r.c / 3.0);
}

TEST(Thm2, Preconditions) {
  EXPECT_EQ(code_of([] { build_thm2({5}, kPi / 12.0); }), ErrorCode::PreconditionKTooSmall);
  EXPECT_EQ(code_of([] { build_thm2({1000, 1010}, kPi / 12.0); }), ErrorCode::WindowOverlap);
  EXPECT_EQ(code_of([] { build_thm2({1000}, 1.0); }), ErrorCode::InvalidArgument);
}

TEST(Thm2, PrefixIsKept) {
  auto pre = PointSequence::from_points({5.0, 6.0, 9.0});
  auto r = build_thm2({1000}, kPi / 12.0, pre);
  const auto pts = r.seq.expanded();
  EXPECT_EQ(pts[0], 5.0);
  EXPECT_EQ(pts[1], 6.0);
  EXPECT_EQ(pts[2], 9.0);
  EXPECT_TRUE(r.certificates[0].pass);
  auto bad = PointSequence::from_points({3.0, 9.0});
  EXPECT_EQ(code_of([&] { build_thm2({1000}, kPi / 12.0, bad); }), ErrorCode::InvalidSequence);
}

TEST(Mk, DensityAndCertificates) {
  auto ks = chain_windows(500, kPi / 12.0, 4);
  auto r = build_mk(5, 2, ks, kPi / 12.0);
  for (double x = 1.0; x <= r.seq.cutoff(); x += 0.5)
    EXPECT_LE(std::abs(double(r.seq.counting(x)) - 0.4 * x), 5.0);
  for (const auto& c : r.certificates) {
    EXPECT_TRUE(c.pass);
    EXPECT_GT(c.block_gain, 0.0);
    EXPECT_GT(c.c_measured, 0.0);
  }
  auto j = r.certificate();
  EXPECT_EQ(j["construction"], "mk");
  EXPECT_EQ(j["witnesses"].size(), ks.size());
}

TEST(Density1, ParametersAtOneMillion) {
  auto p = density1_params(1000000, 0.1);
  EXPECT_EQ(p.m, 251);
  EXPECT_EQ(p.l, 144);
  EXPECT_EQ(p.k, 107);
  EXPECT_EQ(p.J, 1);
}

TEST(Density1, WitnessAtOneMillion) {
  auto r = build_density1({1000000}, 0.1);
  ASSERT_EQ(r.witnesses.size(), 1u);
  const auto& w = r.witnesses[0];
  for (int d : w.deleted_per_block) EXPECT_TRUE(d == w.l || d == w.l - 1);
  EXPECT_GE(w.S_abs, 0.9 * double(w.J * w.l));
  EXPECT_TRUE(w.pass);
  EXPECT_NEAR(std::abs(exp_sum(r.seq, w.x, w.t).value), w.S_abs, 1e-6 * w.S_abs);
  // everything except the deletions survives
  const double top = std::floor(w.x);
  EXPECT_EQ(r.seq.counting(top), static_cast<std::int64_t>(top) - static_cast<std::int64_t>(w.deleted.size()));
  for (double x = 1000.0; x <= r.seq.cutoff(); x *= 1.3)
    EXPECT_LE(std::abs(double(r.seq.counting(x)) - x), 5.0 * std::pow(x, 0.5 + 0.05 + 0.01));
}

TEST(Density1, SmallMRejected) {
  EXPECT_EQ(code_of([] { build_density1({100}, 0.1); }), ErrorCode::PreconditionMTooSmall);
}

TEST(Perturb, AlignsAllPhasesAtTheTarget) {
  std::vector<double> pts;
  std::vector<Box> boxes;
  for (int j = 1; j <= 1200; ++j) {
    pts.push_back(j);
    boxes.push_back({double(j), double(j + 1)});
  }
  auto seq = PointSequence::from_points(pts);
  const double x = 1000.0, t = 30000.0;
  auto r = adversarial_perturb(seq, boxes, [](double, double) { return cplx(0.0); }, 0.5, x, t);
  EXPECT_EQ(r.j0, 1u);
  EXPECT_LE(r.distance, 0.5);
  EXPECT_LE(r.max_phase_error, 1e-6);
  EXPECT_GE(std::abs(r.S), 990.0);
  EXPECT_GE(std::abs(r.S), r.guaranteed - 1.0);
  EXPECT_LE(box_distance(pts, r.points, boxes), 0.5);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    EXPECT_GE(r.points[j], boxes[j].a);
    EXPECT_LE(r.points[j], boxes[j].b);
  }
}

TEST(Perturb, AlignsAgainstANonzeroMainTerm) {
  std::vector<double> pts;
  std::vector<Box> boxes;
  for (int j = 1; j <= 300; ++j) {
    pts.push_back(j + 0.5);
    boxes.push_back({double(j), double(j + 1)});
  }
  auto seq = PointSequence::from_points(pts);
  const auto m = MeanModel::linear(1.0, 1.0);
  auto F = [&](double x, double t) { return m.main_term(x, t).value; };
  const double x = 250.0, t = 20000.0;
  auto r = adversarial_perturb(seq, boxes, F, 0.5, x, t);
  EXPECT_NE(r.F, cplx(0.0));
  EXPECT_GE(std::abs(r.S - r.F), r.guaranteed);
}

TEST(Perturb, SmallTIsInfeasible) {
  auto seq = PointSequence::integers(1, 100);
  std::vector<Box> boxes;
  for (int j = 1; j <= 100; ++j) boxes.push_back({double(j), double(j + 1)});
  EXPECT_EQ(code_of([&] { adversarial_perturb(seq, boxes, [](double, double) { return cplx(0.0); }, 0.5, 100.0, 10.0); }),
            ErrorCode::InfeasibleT);
}

TEST(Mollified, MatchesCountingBetweenPointsAndSumAtT) {
  auto seq = PointSequence::integers(1, 50);
  auto m = mollified_mean(seq, 1.0);
  for (int n = 1; n < 50; ++n) EXPECT_NEAR(m.evaluate(n + 0.5), double(n), 1e-12);
  const double t = 10.0, x = 50.5;
  double bound = 0.0;
  for (int n = 1; n <= 50; ++n) {
    const double w = std::exp(-double(n));
    bound += t * std::log(n / (n - w)) + 1e-12;
  }
  const auto mt = m.main_term(x, t).value;
  const auto s = exp_sum(seq, x, t).value;
  EXPECT_LE(std::abs(mt - s), bound);
  EXPECT_GT(std::abs(mt - s), 0.0);
}

TEST(Mollified, FarPointsBecomePointMasses) {
  auto seq = PointSequence::integers(1, 60);
  auto m = mollified_mean(seq, 1.0);
  const auto& mc = std::get<models::MollifiedComb>(m.kind());
  EXPECT_FALSE(mc.point_mass[0]);
  EXPECT_TRUE(mc.point_mass[59]);
  EXPECT_EQ(mc.max_halfwidth, std::exp(-1.0));
}

TEST(Mollified, ClusteredPointsRejected) {
  auto seq = PointSequence::from_atoms({2.0, 3.0}, {10, 1});
  EXPECT_EQ(code_of([&] { mollified_mean(seq, 1.0); }), ErrorCode::ClusterViolation);
  EXPECT_EQ(code_of([&] { mollified_mean(PointSequence::integers(1, 5), 0.5); }), ErrorCode::InvalidArgument);
}
