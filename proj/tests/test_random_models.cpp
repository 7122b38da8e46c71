#include <gtest/gtest.h>

#include <cmath>

#include "llab/random_models.hpp"

using namespace llab;

TEST(Philox, KnownAnswerVectors) {
  using P = Philox4x32;
  auto z = P::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(z, (P::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  auto f = P::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(f, (P::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  auto p = P::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(p, (P::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterRng, UnitIntervalIsHalfOpenAtZero) {
  EXPECT_EQ(CounterRng::to_unit(0), 0x1.0p-53);
  EXPECT_EQ(CounterRng::to_unit(~0ull), 1.0);
}

TEST(Quantiles, LinearShiftedByOne) {
  auto xs = quantiles_of(MeanModel::linear(1.0, 1.0), 50);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_DOUBLE_EQ(xs[i], double(i + 2));
}

TEST(Quantiles, LogIntegralSolvesLiEqualsJ) {
  auto m = MeanModel::log_integral();
  auto xs = quantiles_of(m, 200);
  for (std::size_t i = 0; i < xs.size(); i += 17) {
    const double j = double(i + 1);
    // independent bisection on the quadrature form of Li
    auto li = [](double x) {
      return integrate([](double u) { return u == 1.0 ? 1.0 : (1.0 - 1.0 / u) / std::log(u); }, 1.0, x,
                       {1e-14, 0.0})
          .value;
    };
    double lo = 1.0, hi = 4096.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (li(mid) >= j ? hi : lo) = mid;
    }
    EXPECT_NEAR(xs[i], hi, 1e-9 * hi);
  }
}

TEST(Quantiles, FloorStepByDirectScan) {
  const int k = 3;
  auto m = MeanModel::floor_step(k, 500.0);
  auto xs = quantiles_of(m, 100);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double j = double(i + 1);
    double scan = 0.0;
    for (double x = 0.0;; x += 1.0)
      if (std::floor(x - k + 1) / k >= j - 1e-12 && x >= k) {
        scan = x;
        break;
      }
    EXPECT_EQ(xs[i], scan);
    EXPECT_EQ(xs[i], k * (j + 1) - 1);
  }
}

TEST(Quantiles, BeyondTableFails) {
  try {
    quantiles_of(MeanModel::floor_step(2, 20.0), 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RootfindFail);
  }
}

TEST(Sample, Thm5UniformMarginalPassesKs) {
  SamplerSpec s;
  s.model = MeanModel::linear(1.0, 1.0);
  s.J = 8;
  s.seed = 99;
  const int n = 10000;
  std::vector<double> u;
  for (int tr = 0; tr < n; ++tr) {
    auto seq = sample(s, tr);
    // index 5 lives on (5, 6]; it is the 5th smallest point
    u.push_back(seq.expanded()[4] - 5.0);
  }
  std::sort(u.begin(), u.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) d = std::max({d, (i + 1.0) / n - u[i], u[i] - double(i) / n});
  EXPECT_LT(d, 1.628 / std::sqrt(double(n)));
}

TEST(Sample, Thm5CountingWithinOneOfMean) {
  SamplerSpec s;
  s.model = MeanModel::log_integral();
  s.J = 3000;
  s.seed = 5;
  auto seq = sample(s);
  const auto& m = *s.model;
  for (double x : seq.values()) {
    EXPECT_LE(std::abs(double(seq.counting(x)) - m.evaluate(x)), 1.0 + 1e-9);
    EXPECT_LE(std::abs(double(seq.counting(std::nextafter(x, 0.0))) - m.evaluate(x)), 1.0 + 1e-9);
  }
  for (double x = 1.0; x <= seq.cutoff(); x *= 1.01)
    EXPECT_LE(std::abs(double(seq.counting(x)) - m.evaluate(x)), 1.0 + 1e-9);
}

TEST(Sample, Thm5PointsInsideTheirSlices) {
  SamplerSpec s;
  s.model = MeanModel::shifted_log_integral(0.75);
  s.J = 500;
  s.seed = 11;
  auto xs = quantiles_of(*s.model, s.J);
  auto pts = sample(s).expanded();
  ASSERT_EQ(pts.size(), xs.size());
  // one point per slice, so the sorted points line up with the slices
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_GT(pts[i], i == 0 ? s.model->x0() : xs[i - 1]);
    EXPECT_LE(pts[i], xs[i]);
  }
}

TEST(Sample, FloorStepAtomsFollowTheMassSplit) {
  // M = (1/2) floor(x - 1): jumps of 1/2 at 2, 3, ...; slice j covers the atoms 2j and 2j+1.
  SamplerSpec s;
  s.model = MeanModel::floor_step(2, 1000.0);
  s.J = 400;
  s.seed = 3;
  auto pts = sample(s).expanded();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double j = double(i + 1);
    EXPECT_TRUE(pts[i] == 2 * j || pts[i] == 2 * j + 1) << pts[i];
  }
}

TEST(Sample, Thm7PointsInIntervalsAndCountControlled) {
  SamplerSpec s;
  s.kind = SamplerKind::Thm7;
  s.J = 10000;
  s.seed = 17;
  auto seq = sample(s);
  double worst = 0.0;
  for (double x = 10.0; x <= seq.cutoff(); x *= 1.005)
    worst = std::max(worst, std::abs(double(seq.counting(x)) - x) / std::sqrt(x));
  EXPECT_LT(worst, 3.0);
  // the largest sample sits inside I_J
  EXPECT_LE(seq.back(), 10000.0 + 100.0);
}

TEST(Sample, SameSpecSameBits) {
  SamplerSpec s;
  s.model = MeanModel::log_integral();
  s.J = 2000;
  s.seed = 123;
  set_thread_count(1);
  auto a = sample(s, 4);
  set_thread_count(4);
  auto b = sample(s, 4);
  EXPECT_EQ(a.values(), b.values());
  s.seed = 124;
  EXPECT_NE(sample(s, 4).values(), a.values());
}

TEST(Sample, BlockConditionIsChecked) {
  SamplerSpec s;
  s.kind = SamplerKind::Thm5Block;
  s.model = MeanModel::linear(1.0, 1.0);
  s.J = 100;
  s.block_c = 1.0;
  s.block_ends = {10, 13, 100};
  EXPECT_THROW(sample(s), Error);
  s.block_ends = uniform_blocks(100, 9, 3);
  auto seq = sample(s);
  EXPECT_EQ(seq.total(), 100);
  const auto& m = *s.model;
  for (double x = 1.0; x <= 101.0; x += 0.25) EXPECT_LE(std::abs(double(seq.counting(x)) - m.evaluate(x)), 9.0);
}

TEST(FDensity, BelowFirstIntervalIsZero) {
  // I_1 = (1 - 0.1, 1 + 0.1] for K = 0.1
  EXPECT_EQ(f_density(0.5, 0.1, 0.5), 0.0);
}

TEST(FDensity, MatchesBruteForceMembership) {
  const double u = 1e4, K = 2.0, theta = 0.3;
  double brute = 0.0;
  for (int j = 1; j <= 20000; ++j) {
    const double h = K * std::pow(j, theta);
    if (u > std::max(0.0, j - h) && u <= j + h) brute += std::pow(j, -theta);
  }
  brute /= 2.0 * K;
  EXPECT_NEAR(f_density(u, K, theta), brute, 1e-13);
}

TEST(FDensity, CloseToOneForLargeU) {
  double worst = 0.0;
  for (double u = 100.0; u <= 1e6; u *= 1.37) worst = std::max(worst, std::abs(f_density(u, 1.0, 0.5) - 1.0) * std::sqrt(u));
  EXPECT_LT(worst, 5.0);
}

TEST(FDensity, IntegralAgainstPiecewiseConstantDensity) {
  // f is constant between consecutive interval endpoints, so midpoint sums are exact.
  const double x = 300.0, K = 1.0, theta = 0.5;
  std::vector<double> cuts{1.0, x};
  for (int j = 1; j <= 400; ++j) {
    const double h = K * std::pow(j, theta);
    for (double c : {j - h, j + h})
      if (c > 1.0 && c < x) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += f_density(0.5 * (cuts[i] + cuts[i + 1]), K, theta) * (cuts[i + 1] - cuts[i]);
  EXPECT_NEAR(f_integral(x, K, theta), total, 1e-10);
}

TEST(Hoeffding, ReferenceFormula) {
  const double xJ = 10001.0, t = 50.0;
  EXPECT_DOUBLE_EQ(hoeffding_reference(xJ, t, 2.0), 4.0 / ((xJ + 1) * (xJ + 1) * (t + 1) * (t + 1)));
}

TEST(MonteCarlo, SingleTrialSinglePointEqualsDeviation) {
  SamplerSpec s;
  s.model = MeanModel::linear(1.0, 1.0);
  s.J = 1000;
  s.seed = 8;
  auto rep = monte_carlo(s, 1, {500.0}, {30.0}, {Norm::ProbBound});
  auto d = deviation(sample(s, 0), *s.model, 500.0, 30.0, {Norm::ProbBound});
  ASSERT_EQ(rep.maxima.size(), 1u);
  EXPECT_DOUBLE_EQ(rep.maxima[0], d.normalized);
  EXPECT_DOUBLE_EQ(rep.q99, d.normalized);
}

TEST(MonteCarlo, QuantilesOrderedAndReportSerializes) {
  SamplerSpec s;
  s.kind = SamplerKind::Thm7;
  s.J = 2000;
  s.seed = 1;
  auto rep = monte_carlo(s, 20, {100.0, 1000.0}, {10.0, 1000.0}, {Norm::ProbJitter, 0.0, 0.5});
  EXPECT_LE(rep.q50, rep.q90);
  EXPECT_LE(rep.q90, rep.q99);
  auto j = rep.to_json();
  EXPECT_EQ(j["max_normalized_dev"].size(), 20u);
  EXPECT_EQ(SamplerSpec::from_json(j["spec"]).to_json(), s.to_json());
}

TEST(MonteCarlo, GridBeyondSampleIsFlagged) {
  SamplerSpec s;
  s.model = MeanModel::linear(1.0, 1.0);
  s.J = 100;
  auto rep = monte_carlo(s, 2, {1000.0}, {10.0}, {Norm::ProbBound});
  EXPECT_EQ(rep.errors[0], "INVALID_GRID");
}
