#include "bps/dlm.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "bps/error.hpp"

namespace bps::dlm {

namespace {

void fill_standard_normal(Rng& rng, Eigen::VectorXd& z) {
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = draw_normal(rng);
}

}  // namespace

Eigen::MatrixXd psd_root(const Eigen::MatrixXd& S) {
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

void Discounts::validate() const {
  if (!(state > 0.0 && state <= 1.0) || !(vol > 0.0 && vol <= 1.0)) {
    std::ostringstream msg;
    msg << "discount factors must lie in (0, 1]; got state=" << state << " vol=" << vol;
    throw ConfigError(msg.str());
  }
}

void DlmPosterior::validate() const {
  if (C.rows() != m.size() || C.cols() != m.size())
    throw std::invalid_argument("DlmPosterior: dim(m) must equal rows(C) and cols(C)");
  if (!(n > 0.0) || !(s > 0.0))
    throw std::invalid_argument("DlmPosterior: n and s must be positive");
}

DlmPosterior make_prior(const Eigen::VectorXd& m0, double c0, double n0, double s0) {
  DlmPosterior p{m0, c0 * Eigen::MatrixXd::Identity(m0.size(), m0.size()), n0, s0};
  p.validate();
  return p;
}

DlmPosterior evolve_prior(const DlmPosterior& post, const Discounts& d) {
  return DlmPosterior{post.m, post.C / d.state, d.vol * post.n, post.s};
}

PredictiveStats one_step_predict(const DlmPosterior& prior, const Eigen::VectorXd& F) {
  if (F.size() != prior.m.size())
    throw std::invalid_argument("one_step_predict: regressor dimension does not match state");
  PredictiveStats out;
  out.f = F.dot(prior.m);
  out.q = F.dot(prior.C * F) + prior.s;
  out.dof = prior.n;
  return out;
}

void filter_update_into(const DlmPosterior& previous, const Eigen::VectorXd& F, double y,
                        const Discounts& d, DlmPosterior& out) {
  if (F.size() != previous.m.size())
    throw std::invalid_argument("filter_update: regressor dimension does not match state");

  // R = C / state; keep the product R F rather than forming R.
  const Eigen::VectorXd RF = (previous.C * F) / d.state;
  const double q = F.dot(RF) + previous.s;
  if (!(q > 0.0) || !std::isfinite(q)) {
    std::ostringstream msg;
    msg << "filter_update: non-positive forecast scale q=" << q;
    throw NumericalError(msg.str());
  }
  const double e = y - F.dot(previous.m);
  const double n_prior = d.vol * previous.n;
  const double n = n_prior + 1.0;
  const double r = (n_prior + e * e / q) / n;

  out.m = previous.m + RF * (e / q);
  // C = r (R - q A A') with A = RF / q  =>  r (R - RF RF' / q)
  out.C.noalias() = previous.C / d.state;
  out.C.noalias() -= (RF * RF.transpose()) / q;
  out.C *= r;
  out.C = 0.5 * (out.C + out.C.transpose()).eval();
  out.n = n;
  out.s = r * previous.s;
}

std::pair<DlmPosterior, PredictiveStats> filter_update(const DlmPosterior& previous,
                                                      const Eigen::VectorXd& F, double y,
                                                      const Discounts& d) {
  PredictiveStats stats = one_step_predict(evolve_prior(previous, d), F);
  if (!(stats.q > 0.0) || !std::isfinite(stats.q)) {
    std::ostringstream msg;
    msg << "filter_update: non-positive forecast scale q=" << stats.q;
    throw NumericalError(msg.str());
  }
  stats.e = y - stats.f;
  stats.A = (previous.C * F) / (d.state * stats.q);
  const double n = d.vol * previous.n + 1.0;
  stats.r = (d.vol * previous.n + stats.e * stats.e / stats.q) / n;

  DlmPosterior post;
  filter_update_into(previous, F, y, d, post);
  return {std::move(post), std::move(stats)};
}

std::vector<DlmPosterior> forward_filter(const DlmPosterior& initial, const Eigen::MatrixXd& F,
                                         std::span<const double> y, const Discounts& d) {
  if (static_cast<std::size_t>(F.rows()) != y.size())
    throw std::invalid_argument("forward_filter: F rows and y length differ");
  std::vector<DlmPosterior> out(y.size());
  const DlmPosterior* prev = &initial;
  Eigen::VectorXd Ft;
  for (std::size_t t = 0; t < y.size(); ++t) {
    Ft = F.row(static_cast<Eigen::Index>(t)).transpose();
    filter_update_into(*prev, Ft, y[t], d, out[t]);
    prev = &out[t];
  }
  return out;
}

void backward_sample_into(std::span<const DlmPosterior> filtered, const Discounts& d, Rng& rng,
                          StateTrajectory& out) {
  if (filtered.empty()) throw std::invalid_argument("backward_sample: empty filtered sequence");
  const auto T = static_cast<Eigen::Index>(filtered.size());
  const Eigen::Index p = filtered.back().dim();
  out.thetas.resize(T, p);
  out.vols.resize(T);

  Eigen::VectorXd z(p);
  Eigen::VectorXd theta(p);
  Eigen::LLT<Eigen::MatrixXd> llt(p);
  // L z with L L' = C; reuses the factorisation workspace across steps.
  auto root_times = [&llt, &z](const Eigen::MatrixXd& C) -> Eigen::VectorXd {
    llt.compute(C);
    if (llt.info() == Eigen::Success) return llt.matrixL() * z;
    return psd_root(C) * z;
  };

  // Time T: 1/v ~ G(n/2, n s / 2), theta ~ N(m, C v / s).
  const DlmPosterior& last = filtered.back();
  double precision = draw_gamma(rng, 0.5 * last.n, 0.5 * last.n * last.s);
  double v = 1.0 / precision;
  fill_standard_normal(rng, z);
  theta = last.m + std::sqrt(v / last.s) * root_times(last.C);
  out.vols(T - 1) = v;
  out.thetas.row(T - 1) = theta.transpose();

  for (Eigen::Index t = T - 2; t >= 0; --t) {
    const DlmPosterior& post = filtered[static_cast<std::size_t>(t)];
    // 1/v_t = vol / v_{t+1} + gamma, gamma ~ G((1 - vol) n_t / 2, n_t s_t / 2)
    precision = d.vol * precision +
                draw_gamma(rng, 0.5 * (1.0 - d.vol) * post.n, 0.5 * post.n * post.s);
    v = 1.0 / precision;
    // theta_t ~ N(m_t + state (theta_{t+1} - m_t), C_t (1 - state) v_t / s_t)
    theta = post.m + d.state * (theta - post.m);
    if (d.state < 1.0) {
      fill_standard_normal(rng, z);
      theta += std::sqrt((1.0 - d.state) * v / post.s) * root_times(post.C);
    }
    out.vols(t) = v;
    out.thetas.row(t) = theta.transpose();
  }
}

StateTrajectory backward_sample(std::span<const DlmPosterior> filtered, const Discounts& d, Rng& rng) {
  StateTrajectory out;
  backward_sample_into(filtered, d, rng, out);
  return out;
}

StateDraw draw_posterior(const DlmPosterior& post, Rng& rng) {
  StateDraw draw;
  draw.v = 1.0 / draw_gamma(rng, 0.5 * post.n, 0.5 * post.n * post.s);
  Eigen::VectorXd z(post.dim());
  fill_standard_normal(rng, z);
  draw.theta = post.m + std::sqrt(draw.v / post.s) * (psd_root(post.C) * z);
  return draw;
}

Eigen::MatrixXd evolution_factor(const DlmPosterior& post, const Discounts& d) {
  if (d.state >= 1.0) return Eigen::MatrixXd::Zero(post.dim(), post.dim());
  return psd_root(post.C * ((1.0 - d.state) / (d.state * post.s)));
}

void propagate(StateDraw& draw, const Eigen::MatrixXd& evolution_root, double n,
               const Discounts& d, Rng& rng) {
  if (d.vol < 1.0) {
    const double gamma = draw_beta(rng, 0.5 * d.vol * n, 0.5 * (1.0 - d.vol) * n);
    draw.v *= d.vol / gamma;
  }
  if (d.state < 1.0) {
    Eigen::VectorXd z(draw.theta.size());
    fill_standard_normal(rng, z);
    draw.theta += std::sqrt(draw.v) * (evolution_root * z);
  }
}

}  // namespace bps::dlm
