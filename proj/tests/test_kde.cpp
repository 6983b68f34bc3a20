#include <gtest/gtest.h>

#include "support.hpp"

using namespace iaa;

TEST(Kde, CdfLimits) {
  const std::vector<double> xs = {0.1, 0.4, 0.45, 0.9};
  const auto m = KdeModel::fit(xs);
  EXPECT_EQ(m.cdf(-std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_EQ(m.cdf(std::numeric_limits<double>::infinity()), 1.0);
  EXPECT_NEAR(m.cdf(-100), 0.0, 1e-15);
  EXPECT_NEAR(m.cdf(100), 1.0, 1e-15);
  const auto b = KdeModel::fit(xs, KdeBounds{0.0, 1.0});
  EXPECT_EQ(b.cdf(0.0), 0.0);
  EXPECT_EQ(b.cdf(-3.0), 0.0);
  EXPECT_EQ(b.cdf(1.0), 1.0);
  EXPECT_EQ(b.pdf(1.5), 0.0);
}

TEST(Kde, SinglePointMedian) {
  const std::vector<double> xs = {0.5};
  EXPECT_DOUBLE_EQ(KdeModel::fit(xs).cdf(0.5), 0.5);
  EXPECT_DOUBLE_EQ(KdeModel::fit(xs, {}, 0.2).cdf(0.5), 0.5);
}

TEST(Kde, ScottBandwidth) {
  const std::vector<double> xs = {0.4, 0.6};
  EXPECT_DOUBLE_EQ(scott_bandwidth(xs), test::scott_oracle(xs));
  EXPECT_NEAR(scott_bandwidth(xs), std::sqrt(0.02) * std::pow(2.0, -0.2), 1e-15);
  EXPECT_EQ(scott_bandwidth(std::vector<double>{1.0}), 0.0);
  EXPECT_EQ(scott_bandwidth(std::vector<double>{2.0, 2.0}), 0.0);
}

TEST(Kde, TwoPointsAgainstQuadrature) {
  const std::vector<double> xs = {0.4, 0.6};
  const double h = test::scott_oracle(xs);
  const auto m = KdeModel::fit(xs);
  ASSERT_DOUBLE_EQ(m.bandwidth(), h);
  const test::MixtureOracle oracle(xs, h, std::nullopt, std::nullopt);
  const std::vector<double> q = {0.5, 0.0, 0.3, 0.62, 1.1};
  const auto expected = oracle.cdf(q);
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_NEAR(m.cdf(q[i]), expected[i], 1e-6) << q[i];
  EXPECT_NEAR(m.cdf(0.5), 0.5, 1e-12);
}

TEST(Kde, BoundedAgainstQuadrature) {
  const std::vector<double> xs = {0.02, 0.05, 0.1, 0.3, 0.97};
  const auto m = KdeModel::fit(xs, KdeBounds{0.0, 1.0});
  const test::MixtureOracle oracle(xs, test::scott_oracle(xs), 0.0, 1.0);
  const std::vector<double> q = {0.01, 0.04, 0.2, 0.5, 0.9, 0.99};
  const auto expected = oracle.cdf(q);
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_NEAR(m.cdf(q[i]), expected[i], 1e-6) << q[i];
}

TEST(Kde, BoundedPdfIntegratesToOne) {
  const std::vector<double> xs = {0.0, 0.0, 0.1, 0.8, 1.0};
  const auto m = KdeModel::fit(xs, KdeBounds{0.0, 1.0});
  EXPECT_NEAR(test::adaptive_simpson([&](double x) { return m.pdf(x); }, 0.0, 1.0, 1e-12), 1.0, 1e-7);
}

TEST(Kde, MonotoneCdf) {
  std::mt19937_64 g(1);
  std::gamma_distribution<double> gamma(2.0, 0.5);
  std::vector<double> xs(300);
  for (auto& x : xs) x = gamma(g);
  for (const auto& bounds : {KdeBounds{}, KdeBounds{0.0, std::nullopt}}) {
    const auto m = KdeModel::fit(xs, bounds);
    double prev = 0;
    for (double x = -1; x < 8; x += 0.01) {
      const double c = m.cdf(x);
      ASSERT_GE(c, prev);
      ASSERT_LE(c, 1.0);
      prev = c;
    }
  }
}

TEST(Kde, DegenerateSampleFallsBack) {
  const std::vector<double> zeros(10, 0.0);
  const auto m = KdeModel::fit(zeros, KdeBounds{0.0, 1.0});
  EXPECT_DOUBLE_EQ(m.bandwidth(), 1e-3);
  EXPECT_GT(m.cdf(0.01), 0.99);
}

TEST(Kde, Errors) {
  EXPECT_THROW(KdeModel::fit(std::vector<double>{}), NumericError);
  EXPECT_THROW(KdeModel::fit(std::vector<double>{1, 2}, {}, -1.0), NumericError);
  EXPECT_THROW(KdeModel::fit(std::vector<double>{1, 2}, KdeBounds{1.0, 1.0}), NumericError);
}
