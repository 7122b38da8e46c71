#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <thread>

#include "llab/io.hpp"
#include "llab/numeric.hpp"
#include "oracles.hpp"

using namespace llab;

TEST(Numeric, NeumaierRecoversCancelledTerms) {
  NeumaierSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  EXPECT_EQ(s.value(), 2.0);
}

TEST(Numeric, GaussLegendreIntegratesPolynomialsExactly) {
  for (int q : {1, 2, 5, 8, 17, 40, 96}) {
    auto r = gauss_legendre(q);
    double w = 0.0;
    for (double x : r.weights) w += x;
    EXPECT_NEAR(w, 2.0, 1e-13) << q;
    // x^{2q-2} integrates to 2/(2q-1)
    double m = 0.0;
    for (int i = 0; i < q; ++i) m += r.weights[i] * std::pow(r.nodes[i], 2 * q - 2);
    EXPECT_NEAR(m, 2.0 / (2 * q - 1), 1e-13) << q;
  }
}

TEST(Numeric, AdaptiveQuadratureMatchesClosedForms) {
  auto r = integrate([](double x) { return std::exp(x); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, std::exp(1.0) - 1.0, 1e-14);
  EXPECT_TRUE(r.converged);
  auto s = integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, {1e-12});
  EXPECT_NEAR(s.value, 2.0 / 3.0, 1e-12);
}

TEST(Numeric, OscillatoryQuadratureWithPanels) {
  const double w = 500.0;
  QuadOptions o;
  o.initial_panels = oscillation_panels(0.0, 3.0, w);
  auto r = integrate([&](double v) { return std::polar(1.0, -w * v); }, 0.0, 3.0, o);
  const cplx exact = (std::polar(1.0, -w * 3.0) - 1.0) / cplx(0.0, -w);
  EXPECT_LT(std::abs(r.value - exact), 1e-12);
}

TEST(Numeric, QuadratureBudgetFailureIsReported) {
  QuadOptions o;
  o.max_evals = 60;
  o.rel_tol = 1e-14;
  EXPECT_THROW(integrate([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0.0, 1.0, o), Error);
  try {
    integrate([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0.0, 1.0, o);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::QuadratureNonconverged);
  }
}

TEST(Numeric, LogIntegralSeries) {
  // independent high-precision value of int_1^10 (1 - 1/u)/ln u du
  EXPECT_NEAR(log_integral(10.0), 4.75435139463780927711, 1e-13);
  auto simpson = oracle::simpson(
      [](double u) { return u == 1.0 ? 1.0 : (1.0 - 1.0 / u) / std::log(u); }, 1.0, 10.0, 200000);
  EXPECT_NEAR(log_integral(10.0), simpson, 1e-10);
  EXPECT_EQ(log_integral(1.0), 0.0);
  // the a = 0 shift is Li itself
  EXPECT_DOUBLE_EQ(shifted_log_integral(1234.5, 0.0), log_integral(1234.5));
}

TEST(Numeric, ShiftedLogIntegralMatchesQuadrature) {
  for (double a : {0.25, 0.5}) {
    const double x = 5000.0;
    auto q = integrate([&](double u) { return u == 1.0 ? 1.0 - a : (1.0 - std::pow(u, a - 1.0)) / std::log(u); }, 1.0,
                       x, {1e-13});
    EXPECT_NEAR(shifted_log_integral(x, a), q.value, 1e-9 * q.value);
  }
}

TEST(Numeric, BisectionFindsThreshold) {
  const double r = bisect_increasing([](double x) { return x * x; }, 2.0, 0.0, 2.0);
  EXPECT_NEAR(r, std::sqrt(2.0), 1e-14);
}

TEST(Numeric, ParallelForIsOrderIndependent) {
  std::vector<double> a(1000), b(1000);
  set_thread_count(1);
  parallel_for(a.size(), [&](std::size_t i) { a[i] = std::sin(double(i)); });
  set_thread_count(4);
  parallel_for(b.size(), [&](std::size_t i) { b[i] = std::sin(double(i)); });
  set_thread_count(0);
  EXPECT_EQ(a, b);
}

TEST(Numeric, ZeroThreadCountRestoresAutomaticChoice) {
  set_thread_count(3);
  EXPECT_EQ(thread_count(), 3);
  set_thread_count(0);
  const char* env = std::getenv("LLAB_THREADS");
  if (env && std::atoi(env) > 0)
    EXPECT_EQ(thread_count(), std::atoi(env));
  else
    EXPECT_EQ(thread_count(), std::max(1, int(std::thread::hardware_concurrency())));
  set_thread_count(0);
}

TEST(Io, RealFormattingRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 123456789.0}) {
    EXPECT_EQ(io::parse_real(io::format_real(v)), v);
  }
  EXPECT_EQ(io::format_real(0.5), "0.5");
  EXPECT_EQ(io::format_real(0.1), "0.10000000000000001");
}
