#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bps/error.hpp"
#include "bps/pools.hpp"

namespace {

using bps::ForecastDensity;
using namespace bps::pools;

double integrate(const std::function<double(double)>& f, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-12);
}

TEST(Pools, BmaSequentialEqualsBatch) {
  bps::Rng rng = bps::make_rng(81);
  const int T = 40, J = 4;
  std::vector<std::vector<double>> lik(T, std::vector<double>(J));
  for (auto& row : lik)
    for (auto& x : row) x = 0.05 + bps::draw_uniform(rng) * 2.0;
  BmaState state = BmaState::uniform(J);
  for (const auto& row : lik) state = bma_update(state, row);
  // Batch: probabilities proportional to the product of likelihoods.
  std::vector<double> logp(J, 0.0);
  for (const auto& row : lik)
    for (int j = 0; j < J; ++j) logp[static_cast<std::size_t>(j)] += std::log(row[static_cast<std::size_t>(j)]);
  const double top = *std::max_element(logp.begin(), logp.end());
  double z = 0.0;
  for (double l : logp) z += std::exp(l - top);
  for (int j = 0; j < J; ++j)
    EXPECT_NEAR(state.probs[static_cast<std::size_t>(j)], std::exp(logp[static_cast<std::size_t>(j)] - top) / z, 1e-10);
}

TEST(Pools, BmaStaysOnSimplex) {
  bps::Rng rng = bps::make_rng(83);
  BmaState state = BmaState::uniform(3);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> lik{bps::draw_uniform(rng) * 1e-3, bps::draw_uniform(rng), 1e-300};
    state = bma_update(state, lik);
    double s = 0.0;
    for (double p : state.probs) {
      EXPECT_GE(p, 0.0);
      s += p;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  EXPECT_THROW(bma_update(BmaState::uniform(2), std::vector<double>{0.0, 0.0}), bps::NumericalError);
}

TEST(Pools, LinearPoolMomentsAndIntegral) {
  const std::vector<ForecastDensity> comps{ForecastDensity::normal(0.0, 1.0), ForecastDensity::student_t(2.0, 0.5, 6.0)};
  const auto pool = linear_pool(comps);
  EXPECT_NEAR(pool.mean(), 1.0, 1e-12);
  // Mixture variance: mean of variances plus variance of means.
  EXPECT_NEAR(pool.variance(), 0.5 * (1.0 + 0.5 * 6.0 / 4.0) + 1.0, 1e-12);
  EXPECT_NEAR(integrate([&](double y) { return pool.pdf(y); }, -60.0, 60.0), 1.0, 1e-6);
  for (double y : {-5.0, 0.0, 1.7, 9.0}) EXPECT_GE(pool.pdf(y), 0.0);
  bps::Rng rng = bps::make_rng(85);
  double m = 0.0;
  for (int i = 0; i < 100000; ++i) m += pool.draw(rng) / 100000.0;
  EXPECT_NEAR(m, 1.0, 0.02);
}

TEST(Pools, BmaMixtureUsesWeights) {
  const std::vector<ForecastDensity> comps{ForecastDensity::normal(0.0, 1.0), ForecastDensity::normal(4.0, 1.0)};
  BmaState s{{0.25, 0.75}};
  EXPECT_NEAR(bma_mixture(comps, s).mean(), 3.0, 1e-12);
}

TEST(Pools, LogPoolOfIdenticalDensities) {
  const auto d = ForecastDensity::student_t(1.0, 0.3, 7.0);
  const auto pool = log_pool({d, d, d});
  for (double y : {-1.0, 0.5, 1.0, 2.5}) EXPECT_NEAR(pool.pdf(y), d.pdf(y), 1e-8);
}

TEST(Pools, LogPoolOfNormalsIsPrecisionWeighted) {
  // prod N(m_j, s_j)^(1/J) is normal with precision mean(1/s_j).
  const auto pool = log_pool({ForecastDensity::normal(0.0, 1.0), ForecastDensity::normal(3.0, 4.0)});
  const double prec = 0.5 * (1.0 + 0.25);
  const double mean = 0.5 * (0.0 + 3.0 * 0.25) / prec;
  EXPECT_NEAR(pool.mean(), mean, 1e-8);
  EXPECT_NEAR(pool.variance(), 1.0 / prec, 1e-8);
  EXPECT_NEAR(pool.pdf(1.0), bps::normal_pdf(1.0, mean, 1.0 / prec), 1e-8);
}

}  // namespace
