#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bps/dlm.hpp"
#include "bps/error.hpp"
#include "oracles.hpp"

namespace {

using bps::dlm::Discounts;
using bps::dlm::DlmPosterior;

TEST(Dlm, HandEvaluatedUpdate) {
  const DlmPosterior prior = bps::dlm::make_prior(Eigen::VectorXd::Zero(1), 1.0, 1.0, 1.0);
  const auto [post, stats] = bps::dlm::filter_update(prior, Eigen::VectorXd::Ones(1), 0.0, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(stats.q, 2.0);
  EXPECT_DOUBLE_EQ(stats.A(0), 0.5);
  EXPECT_DOUBLE_EQ(stats.r, 0.5);
  EXPECT_DOUBLE_EQ(post.m(0), 0.0);
  EXPECT_DOUBLE_EQ(post.C(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(post.n, 2.0);
  EXPECT_DOUBLE_EQ(post.s, 0.5);
}

TEST(Dlm, UnitDiscountsMatchStaticRegression) {
  bps::Rng rng = bps::make_rng(11);
  const int T = 60;
  const int p = 3;
  Eigen::MatrixXd X(T, p);
  Eigen::VectorXd y(T);
  for (int t = 0; t < T; ++t) {
    X(t, 0) = 1.0;
    X(t, 1) = bps::draw_normal(rng);
    X(t, 2) = bps::draw_normal(rng, 2.0, 0.5);
    y(t) = 0.3 - X(t, 1) + 0.5 * X(t, 2) + 0.4 * bps::draw_normal(rng);
  }
  Eigen::VectorXd m0(p);
  m0 << 0.1, 0.0, -0.2;
  const double c0 = 2.0, n0 = 3.0, s0 = 0.7;
  const auto prior = bps::dlm::make_prior(m0, c0, n0, s0);
  std::vector<double> ys(y.data(), y.data() + T);
  const auto filtered = bps::dlm::forward_filter(prior, X, ys, {1.0, 1.0});
  const auto ref = oracle::static_regression(m0, prior.C / s0, n0, s0, X, y);
  const DlmPosterior& last = filtered.back();
  EXPECT_NEAR(last.n, ref.n, 1e-12);
  EXPECT_NEAR(last.s / ref.s - 1.0, 0.0, 1e-10);
  EXPECT_LT((last.m - ref.m).norm() / ref.m.norm(), 1e-10);
  EXPECT_LT((last.C - ref.V * ref.s).norm() / (ref.V * ref.s).norm(), 1e-10);
}

TEST(Dlm, PredictiveIsStudentTMixture) {
  // Integrate N(y; F'theta, v) over theta | v and 1/v ~ Gamma: the result must be
  // the Student-T predictive returned by one_step_predict.
  Eigen::VectorXd m(2);
  m << 0.5, 1.0;
  DlmPosterior prior{m, Eigen::MatrixXd::Identity(2, 2) * 0.3, 6.0, 0.2};
  Eigen::VectorXd F(2);
  F << 1.0, 0.7;
  const auto stats = bps::dlm::one_step_predict(prior, F);
  const double y = 1.6;
  // y | v ~ N(f, v (F'CF / s + 1)); integrate over the precision.
  const double g = F.dot(prior.C * F) / prior.s + 1.0;
  auto integrand = [&](double lambda) {
    const double a = 0.5 * prior.n, b = 0.5 * prior.n * prior.s;
    const double log_gamma_pdf = a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(lambda) - b * lambda;
    const double var = g / lambda;
    const double log_normal = -0.5 * std::log(2.0 * M_PI * var) - 0.5 * (y - stats.f) * (y - stats.f) / var;
    return std::exp(log_gamma_pdf + log_normal);
  };
  const double mixed = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0,
                                                                                    std::numeric_limits<double>::infinity());
  boost::math::students_t_distribution<double> t(stats.dof);
  const double analytic = boost::math::pdf(t, (y - stats.f) / std::sqrt(stats.q)) / std::sqrt(stats.q);
  EXPECT_NEAR(mixed, analytic, 1e-8);
}

TEST(Dlm, DiscountingInflatesScale) {
  const auto prior = bps::dlm::make_prior(Eigen::VectorXd::Zero(2), 1.0, 5.0, 1.0);
  const auto evolved = bps::dlm::evolve_prior(prior, {0.9, 0.8});
  EXPECT_NEAR(evolved.C(0, 0), 1.0 / 0.9, 1e-15);
  EXPECT_NEAR(evolved.n, 4.0, 1e-15);
  EXPECT_EQ(evolved.s, prior.s);
}

TEST(Dlm, MismatchedDimensionThrows) {
  const auto prior = bps::dlm::make_prior(Eigen::VectorXd::Zero(2), 1.0, 5.0, 1.0);
  EXPECT_THROW(bps::dlm::one_step_predict(prior, Eigen::VectorXd::Ones(3)), std::invalid_argument);
}

TEST(Dlm, NegativeScaleIsNumericalError) {
  DlmPosterior bad{Eigen::VectorXd::Zero(1), -Eigen::MatrixXd::Identity(1, 1) * 10.0, 2.0, 1.0};
  EXPECT_THROW(bps::dlm::filter_update(bad, Eigen::VectorXd::Ones(1), 0.0, {1.0, 1.0}), bps::NumericalError);
}

TEST(Dlm, PosteriorCovarianceStaysSymmetricPsd) {
  bps::Rng rng = bps::make_rng(17);
  const int T = 300;
  Eigen::MatrixXd F(T, 4);
  std::vector<double> y(T);
  for (int t = 0; t < T; ++t) {
    F(t, 0) = 1.0;
    for (int j = 1; j < 4; ++j) F(t, j) = bps::draw_normal(rng);
    y[static_cast<std::size_t>(t)] = bps::draw_normal(rng);
  }
  const auto filtered = bps::dlm::forward_filter(bps::dlm::make_prior(Eigen::VectorXd::Zero(4), 1.0, 2.0, 1.0), F, y,
                                                 {0.95, 0.98});
  for (const auto& post : filtered) {
    EXPECT_LT((post.C - post.C.transpose()).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(post.C);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    EXPECT_GT(post.n, 0.0);
    EXPECT_GT(post.s, 0.0);
  }
}

TEST(Dlm, BackwardSampleTerminalMoments) {
  // The terminal draw of FFBS is the filtered posterior at T: check its
  // T-marginal mean and variance, and the precision's Gamma mean.
  Eigen::VectorXd m(2);
  m << 1.0, -0.5;
  Eigen::MatrixXd C(2, 2);
  C << 0.4, 0.1, 0.1, 0.2;
  const std::vector<DlmPosterior> filtered{{m, C, 8.0, 0.5}};
  bps::Rng rng = bps::make_rng(23);
  const int n = 100000;
  double sum0 = 0, sq0 = 0, prec = 0;
  for (int i = 0; i < n; ++i) {
    const auto traj = bps::dlm::backward_sample(filtered, {0.95, 0.98}, rng);
    sum0 += traj.thetas(0, 0);
    sq0 += (traj.thetas(0, 0) - 1.0) * (traj.thetas(0, 0) - 1.0);
    prec += 1.0 / traj.vols(0);
  }
  EXPECT_NEAR(sum0 / n, 1.0, 0.01);
  // Marginal Student-T variance C n / (n - 2).
  EXPECT_NEAR(sq0 / n, 0.4 * 8.0 / 6.0, 0.01);
  EXPECT_NEAR(prec / n, 1.0 / 0.5, 0.02);
}

TEST(Dlm, BackwardSampleSmoothingMean) {
  // With unit vol discount the volatility is static and the smoothed mean at
  // t follows m_t + state (E theta_{t+1} - m_t).
  bps::Rng rng = bps::make_rng(29);
  Eigen::MatrixXd F = Eigen::MatrixXd::Ones(3, 1);
  const std::vector<double> y{1.0, 2.0, 0.5};
  const Discounts d{0.8, 1.0};
  const auto filtered = bps::dlm::forward_filter(bps::dlm::make_prior(Eigen::VectorXd::Zero(1), 1.0, 5.0, 1.0), F, y, d);
  const int n = 200000;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) mean += bps::dlm::backward_sample(filtered, d, rng).thetas.col(0) / n;
  const double s2 = filtered[2].m(0);
  const double s1 = filtered[1].m(0) + 0.8 * (s2 - filtered[1].m(0));
  const double s0 = filtered[0].m(0) + 0.8 * (s1 - filtered[0].m(0));
  EXPECT_NEAR(mean(2), s2, 0.01);
  EXPECT_NEAR(mean(1), s1, 0.01);
  EXPECT_NEAR(mean(0), s0, 0.01);
}

TEST(Dlm, PropagateVolatilityMartingale) {
  // E[1/v'] = E[1/v] under the beta-gamma step: gamma / (vol v) has mean 1/v.
  bps::Rng rng = bps::make_rng(31);
  const int n = 200000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    bps::dlm::StateDraw draw{Eigen::VectorXd::Zero(1), 2.0};
    bps::dlm::propagate(draw, Eigen::MatrixXd::Zero(1, 1), 20.0, {1.0, 0.9}, rng);
    acc += 1.0 / draw.v;
  }
  EXPECT_NEAR(acc / n, 0.5, 0.005);
}

TEST(Dlm, PropagateStateVariance) {
  bps::Rng rng = bps::make_rng(37);
  const DlmPosterior post{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 0.5), 10.0, 2.0};
  const Discounts d{0.9, 1.0};
  const Eigen::MatrixXd root = bps::dlm::evolution_factor(post, d);
  const int n = 200000;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    bps::dlm::StateDraw draw{Eigen::VectorXd::Zero(1), 3.0};
    bps::dlm::propagate(draw, root, post.n, d, rng);
    sq += draw.theta(0) * draw.theta(0);
  }
  // W v / s with W = C (1 - state) / state.
  EXPECT_NEAR(sq / n, 0.5 * (0.1 / 0.9) * 3.0 / 2.0, 0.002);
}

}  // namespace
