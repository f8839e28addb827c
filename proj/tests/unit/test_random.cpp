#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <boost/math/distributions/gamma.hpp>

#include "bps/random.hpp"
#include "oracles.hpp"

namespace {

TEST(Random, StreamsAreDeterministicAndDistinct) {
  bps::Rng a = bps::make_rng(42, {1, 2});
  bps::Rng b = bps::make_rng(42, {1, 2});
  bps::Rng c = bps::make_rng(42, {2, 1});
  EXPECT_EQ(a(), b());
  EXPECT_NE(bps::make_rng(42, {1, 2})(), c());
}

TEST(Random, GammaMatchesCdf) {
  for (double shape : {0.3, 1.0, 2.5, 40.0}) {
    bps::Rng rng = bps::make_rng(7, {static_cast<std::uint64_t>(shape * 10)});
    std::vector<double> xs(20000);
    for (auto& x : xs) x = bps::draw_gamma(rng, shape, 2.0);
    boost::math::gamma_distribution<double> g(shape, 0.5);
    const double d = oracle::ks_statistic(xs, [&](double x) { return boost::math::cdf(g, x); });
    EXPECT_GT(oracle::ks_pvalue(d, xs.size()), 0.001) << "shape " << shape;
  }
}

TEST(Random, ZeroShapeGammaIsZero) {
  bps::Rng rng = bps::make_rng(1);
  EXPECT_EQ(bps::draw_gamma(rng, 0.0, 1.0), 0.0);
}

TEST(Random, NormalMatchesCdf) {
  bps::Rng rng = bps::make_rng(3);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = bps::draw_normal(rng);
  const double d = oracle::ks_statistic(xs, oracle::normal_cdf);
  EXPECT_GT(oracle::ks_pvalue(d, xs.size()), 0.001);
}

TEST(Random, BetaMean) {
  bps::Rng rng = bps::make_rng(5);
  double sum = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) sum += bps::draw_beta(rng, 2.0, 6.0);
  EXPECT_NEAR(sum / n, 0.25, 0.005);
}

TEST(Random, MvnCovariance) {
  bps::Rng rng = bps::make_rng(9);
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.6, 0.6, 1.0;
  Eigen::VectorXd mean(2);
  mean << 1.0, -1.0;
  const int n = 100000;
  Eigen::MatrixXd xs(n, 2);
  for (int i = 0; i < n; ++i) xs.row(i) = bps::draw_mvn(rng, mean, cov).transpose();
  const Eigen::RowVectorXd m = xs.colwise().mean();
  const Eigen::MatrixXd c = (xs.rowwise() - m).transpose() * (xs.rowwise() - m) / (n - 1);
  EXPECT_NEAR(m(0), 1.0, 0.02);
  EXPECT_NEAR(c(0, 1), 0.6, 0.03);
  EXPECT_NEAR(c(0, 0), 2.0, 0.04);
}

TEST(Random, MvnSingularCovariance) {
  bps::Rng rng = bps::make_rng(10);
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 1.0, 1.0, 1.0;
  const Eigen::VectorXd x = bps::draw_mvn(rng, Eigen::VectorXd::Zero(2), cov);
  EXPECT_NEAR(x(0), x(1), 1e-10);
}

}  // namespace
