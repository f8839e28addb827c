#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "bps/density.hpp"
#include "bps/eval.hpp"

namespace {

using bps::ForecastDensity;

TEST(Density, StandardNormalAtZero) {
  EXPECT_NEAR(ForecastDensity::normal(0.0, 1.0).pdf(0.0), 0.39894228, 1e-8);
  EXPECT_NEAR(bps::eval::density_value(ForecastDensity::normal(0.0, 1.0), 0.0), 0.39894, 1e-5);
}

TEST(Density, StudentTMatchesBoost) {
  const auto d = ForecastDensity::student_t(1.0, 0.25, 5.0);
  boost::math::students_t_distribution<double> t(5.0);
  for (double y : {-2.0, 0.3, 1.0, 4.0})
    EXPECT_NEAR(d.pdf(y), boost::math::pdf(t, (y - 1.0) / 0.5) / 0.5, 1e-12);
  EXPECT_NEAR(d.variance(), 0.25 * 5.0 / 3.0, 1e-12);
  EXPECT_TRUE(std::isinf(ForecastDensity::student_t(0.0, 1.0, 2.0).variance()));
}

TEST(Density, HugeDofApproachesNormal) {
  const auto t = ForecastDensity::student_t(0.5, 2.0, 1e7);
  const auto n = ForecastDensity::normal(0.5, 2.0);
  for (double y : {-1.0, 0.5, 3.0}) EXPECT_NEAR(t.pdf(y), n.pdf(y), 1e-3);
}

TEST(Density, KdeOfNormalDraws) {
  bps::Rng rng = bps::make_rng(41);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = bps::draw_normal(rng);
  EXPECT_NEAR(bps::eval::density_value(xs, 0.0), 0.399, 0.02);
  EXPECT_NEAR(ForecastDensity::from_samples(xs).pdf(1.0), 0.242, 0.02);
}

TEST(Density, SilvermanBandwidth) {
  // For n = 5 equally spaced points the IQR rule applies when it is smaller.
  const std::vector<double> xs{0.0, 1.0, 2.0, 3.0, 4.0};
  const double sd = std::sqrt(2.5);
  const double iqr = 2.0;
  EXPECT_NEAR(bps::silverman_bandwidth(xs), 0.9 * std::min(sd, iqr / 1.34) * std::pow(5.0, -0.2), 1e-12);
}

TEST(Density, EmptySampleThrows) {
  const std::vector<double> none;
  EXPECT_THROW(bps::eval::density_value(std::span<const double>(none), 0.0), std::invalid_argument);
  EXPECT_THROW(ForecastDensity::from_samples({}), std::invalid_argument);
}

TEST(Density, StudentTDrawsHaveRightSpread) {
  const auto d = ForecastDensity::student_t(2.0, 0.5, 8.0);
  bps::Rng rng = bps::make_rng(43);
  const int n = 200000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double x = d.draw(rng);
    s += x;
    ss += x * x;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 2.0, 0.01);
  EXPECT_NEAR(ss / n - mean * mean, d.variance(), 0.02);
}

}  // namespace
