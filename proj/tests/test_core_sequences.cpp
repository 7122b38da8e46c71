#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "llab/core_sequences.hpp"
#include "oracles.hpp"

using namespace llab;

TEST(ExpSum, ZeroFrequencyIsTheCount) {
  auto seq = PointSequence::from_points({1, 2, 3});
  auto r = exp_sum(seq, 3.0, 0.0);
  EXPECT_EQ(r.value, cplx(3.0, 0.0));
  EXPECT_EQ(r.terms_used, 3);
}

TEST(ExpSum, FullTurnPhase) {
  const double n = std::exp(kTwoPi);
  auto seq = PointSequence::from_points({n});
  auto r = exp_sum(seq, n, 1.0);
  EXPECT_NEAR(r.value.real(), 1.0, 1e-14);
  EXPECT_NEAR(r.value.imag(), 0.0, 1e-14);
}

TEST(ExpSum, MatchesDirectScalarEvaluation) {
  auto seq = PointSequence::from_points({2, 3});
  auto r = exp_sum(seq, 2.5, 5.0);
  const cplx expect = std::exp(cplx(0.0, -5.0 * std::log(2.0)));
  EXPECT_LT(std::abs(r.value - expect), 1e-15);
  EXPECT_EQ(r.terms_used, 1);
}

TEST(ExpSum, MultiplicitiesCountRepeatedly) {
  auto seq = PointSequence::from_points({1, 2, 2, 5});
  const double t = 3.0;
  auto r = exp_sum(seq, 10.0, t);
  cplx direct = 0.0;
  for (double p : {1.0, 2.0, 2.0, 5.0}) direct += std::polar(1.0, -t * std::log(p));
  EXPECT_LT(std::abs(r.value - direct), 1e-14);
  EXPECT_EQ(r.terms_used, 4);
}

TEST(ExpSum, LargeSumAgainstLongDoubleOracle) {
  auto seq = PointSequence::integers(1, 200000);
  const double t = 1234.5;
  auto r = exp_sum(seq, 150000.5, t);
  long double re = 0, im = 0;
  for (long n = 1; n <= 150000; ++n) {
    const long double ph = -static_cast<long double>(t) * std::log(static_cast<long double>(n));
    re += std::cos(ph);
    im += std::sin(ph);
  }
  EXPECT_LT(std::abs(r.value - cplx(double(re), double(im))), r.est_roundoff);
  EXPECT_LT(r.est_roundoff, 1e-6);
}

TEST(Counting, Examples) {
  auto seq = PointSequence::from_points({1, 2, 2, 5});
  EXPECT_EQ(counting(seq, 2.0), 3);
  EXPECT_EQ(counting(seq, 0.5), 0);
  EXPECT_EQ(counting(seq, 5.0), 4);
  auto ints = PointSequence::integers(1, 100);
  EXPECT_EQ(counting(ints, kPi * 10.0), 31);
}

TEST(Sequence, RejectsNonPositivePoints) {
  EXPECT_THROW(PointSequence::from_points({1.0, 0.0}), Error);
  EXPECT_THROW(PointSequence::from_points({1.0, -2.0}), Error);
}

TEST(Sequence, CsvRoundTrip) {
  auto seq = PointSequence::from_points({0.1, 2.0 / 3.0, 2.0 / 3.0, 1e9 + 0.5});
  auto back = PointSequence::from_csv(seq.to_csv());
  EXPECT_EQ(back.values(), seq.values());
  EXPECT_EQ(back.multiplicities(), seq.multiplicities());
}

TEST(MainTerm, LinearUnitInterval) {
  auto m = MeanModel::linear(1.0, 1.0);
  auto r = main_term(m, std::exp(1.0), 0.0);
  EXPECT_NEAR(r.value.real(), std::exp(1.0) - 1.0, 1e-15);
}

TEST(MainTerm, LinearAgainstSimpson) {
  auto m = MeanModel::linear(1.0, 1.0);
  auto r = main_term(m, 4.0, 1.0);
  const cplx closed = (std::pow(cplx(4.0), cplx(1.0, -1.0)) - 1.0) / cplx(1.0, -1.0);
  auto simpson = oracle::simpson([](double u) { return std::polar(1.0, -std::log(u)); }, 1.0, 4.0, 20000);
  EXPECT_LT(std::abs(r.value - closed), 1e-14);
  EXPECT_LT(std::abs(r.value - simpson), 1e-12);
}

TEST(MainTerm, LogIntegralAtZeroFrequency) {
  auto m = MeanModel::log_integral();
  auto r = main_term(m, 10.0, 0.0);
  EXPECT_NEAR(r.value.real(), 4.75435139463780927711, 1e-10);
  EXPECT_NEAR(r.value.imag(), 0.0, 1e-14);
}

TEST(MainTerm, LogIntegralOscillatingAgainstSimpson) {
  auto m = MeanModel::log_integral();
  const double t = 37.0, x = 500.0;
  auto r = main_term(m, x, t);
  auto simpson = oracle::simpson(
      [&](double u) { return u == 1.0 ? cplx(1.0) : std::polar((1.0 - 1.0 / u) / std::log(u), -t * std::log(u)); },
      1.0, x, 4000000);
  EXPECT_LT(std::abs(r.value - simpson), 1e-7);
  EXPECT_LT(r.abs_error, 1e-8 * std::abs(r.value) + 1e-12);
}

TEST(MainTerm, TabulatedStepSumsAtoms) {
  auto m = MeanModel::tabulated({2.0, 3.0, 7.0}, {0.5, 1.0, 2.0}, 1.0);
  auto r = main_term(m, 5.0, 2.0);
  const cplx expect = 0.5 * std::polar(1.0, -2.0 * std::log(2.0)) + std::polar(1.0, -2.0 * std::log(3.0));
  EXPECT_LT(std::abs(r.value - expect), 1e-15);
  EXPECT_DOUBLE_EQ(m.evaluate(6.9), 1.5);
}

TEST(Deviation, IntegersAgainstLinearModel) {
  auto seq = PointSequence::integers(1, 100);
  auto m = MeanModel::linear(1.0, 0.0);
  const double x = 100.0, t = 1e4;
  auto d = deviation(seq, m, x, t, {Norm::LhEps, 0.1});
  // both sides by direct evaluation
  cplx s = 0.0;
  for (int n = 1; n <= 100; ++n) s += std::polar(1.0, -t * std::log(double(n)));
  const cplx main = std::pow(cplx(100.0), cplx(1.0, -t)) / cplx(1.0, -t);
  const double expect = std::abs(s - main) / (10.0 * std::pow(t, 0.1));
  EXPECT_GT(d.normalized, 0.0);
  EXPECT_NEAR(d.normalized, expect, 1e-9 * expect);
}

TEST(Deviation, ZeroWhenSequenceMatchesMainTerm) {
  // the step model built from the sequence itself has the same Stieltjes sum
  auto seq = PointSequence::from_points({2.0, 3.0, 5.0});
  auto m = MeanModel::tabulated({2.0, 3.0, 5.0}, {1.0, 1.0, 1.0}, 1.0);
  auto d = deviation(seq, m, 6.0, 11.0, {Norm::ProbBound});
  EXPECT_LT(d.raw, 1e-15);
}

TEST(Deviation, LhEpsNeedsLargeFrequency) {
  auto seq = PointSequence::integers(1, 10);
  auto m = MeanModel::linear(1.0, 0.0);
  EXPECT_THROW(deviation(seq, m, 5.0, 0.5, {Norm::LhEps, 0.1}), Error);
}

TEST(Deviation, DegenerateNormalizerIsReported) {
  auto seq = PointSequence::integers(1, 10);
  auto m = MeanModel::linear(1.0, 2.0);
  try {
    deviation(seq, m, 2.0, 5.0, {Norm::ProbBound});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivisionDegenerate);
  }
}

TEST(Scan, SinglePointEqualsDeviation) {
  auto seq = PointSequence::integers(1, 100);
  auto m = MeanModel::linear(1.0, 0.0);
  auto g = scan(seq, m, {50.5}, TRule::explicit_list({300.0}), {Norm::LhEps, 0.1});
  ASSERT_EQ(g.entries.size(), 1u);
  EXPECT_EQ(g.entries[0].normalized, deviation(seq, m, 50.5, 300.0, {Norm::LhEps, 0.1}).normalized);
}

TEST(Scan, PowerRuleMatchesPointwiseCalls) {
  auto seq = PointSequence::integers(1, 100);
  auto m = MeanModel::linear(1.0, 0.0);
  auto g = scan(seq, m, {100.0, 10.0}, TRule::from_power(2.0), {Norm::LhEps, 0.1});
  ASSERT_EQ(g.entries.size(), 2u);
  EXPECT_EQ(g.entries[0].x, 10.0);
  EXPECT_EQ(g.entries[0].t, 100.0);
  EXPECT_EQ(g.entries[1].t, 1e4);
  for (const auto& e : g.entries)
    EXPECT_EQ(e.normalized, deviation(seq, m, e.x, e.t, {Norm::LhEps, 0.1}).normalized);
}

TEST(Scan, EmptyTListIsInvalidGrid) {
  auto seq = PointSequence::integers(1, 100);
  auto m = MeanModel::linear(1.0, 0.0);
  try {
    scan(seq, m, {10.0}, TRule::explicit_list({}), {Norm::ProbBound});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidGrid);
  }
}

TEST(Scan, PointErrorsAreFlaggedNotFatal) {
  auto seq = PointSequence::integers(1, 100);
  auto m = MeanModel::linear(1.0, 0.0);
  auto g = scan(seq, m, {10.0, 50.0}, TRule::explicit_list({0.5, 20.0}), {Norm::LhEps, 0.1});
  ASSERT_EQ(g.entries.size(), 4u);
  EXPECT_EQ(g.entries[0].error, "INVALID_ARGUMENT");
  EXPECT_TRUE(g.entries[1].error.empty());
  const auto csv = g.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,t,raw_dev,normalized_dev,norm,eps");
}

TEST(Scan, CsvIsBitStable) {
  auto seq = PointSequence::integers(1, 1000);
  auto m = MeanModel::log_integral();
  auto a = scan(seq, m, {10.0, 100.0, 1000.0}, TRule::explicit_list({3.0, 30.0}), {Norm::ProbBound});
  auto b = scan(seq, m, {1000.0, 10.0, 100.0}, TRule::explicit_list({30.0, 3.0}), {Norm::ProbBound});
  EXPECT_EQ(a.to_csv(), b.to_csv());
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}
