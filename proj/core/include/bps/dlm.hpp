#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bps/random.hpp"

// Conjugate discount-factor dynamic linear models.
//
// Conventions follow the usual normal/inverse-gamma DLM scaling:
//   theta_t | v_t, D_t ~ N(m_t, C_t v_t / s_t),   1/v_t | D_t ~ G(n_t/2, n_t s_t/2)
// so C is expressed in units of the point volatility estimate s.
namespace bps::dlm {

/// Discount factors, named by role. `state` inflates the coefficient scale
/// (R = C / state); `vol` discounts the volatility degrees of freedom
/// (n -> vol * n) and drives the beta-gamma volatility random walk.
struct Discounts {
  double state = 1.0;
  double vol = 1.0;

  void validate() const;
};

struct DlmPosterior {
  Eigen::VectorXd m;
  Eigen::MatrixXd C;
  double n = 1.0;
  double s = 1.0;

  Eigen::Index dim() const { return m.size(); }
  void validate() const;
};

/// Prior with mean `m0`, scale `c0 * I`, dof `n0` and volatility estimate `s0`.
DlmPosterior make_prior(const Eigen::VectorXd& m0, double c0, double n0, double s0);

struct PredictiveStats {
  double f = 0.0;    // forecast location
  double q = 1.0;    // forecast (squared) scale
  double dof = 1.0;  // Student-T degrees of freedom
  double e = 0.0;    // forecast error y - f
  Eigen::VectorXd A; // adaptive vector R F / q
  double r = 1.0;    // volatility update ratio
};

/// Time t-1 posterior -> time t prior: same m and s, C / state, vol * n.
DlmPosterior evolve_prior(const DlmPosterior& post, const Discounts& d);

/// 1-step Student-T predictive from an (already evolved) prior. Fills f, q, dof.
PredictiveStats one_step_predict(const DlmPosterior& prior, const Eigen::VectorXd& F);

/// One full filtering step from the time t-1 posterior `previous`: evolve,
/// predict, then update on `y`. Throws NumericalError when q <= 0.
std::pair<DlmPosterior, PredictiveStats> filter_update(const DlmPosterior& previous,
                                                      const Eigen::VectorXd& F, double y,
                                                      const Discounts& d);

/// In-place variant used by the samplers; avoids reallocating when `out`
/// already has the right shape.
void filter_update_into(const DlmPosterior& previous, const Eigen::VectorXd& F, double y,
                        const Discounts& d, DlmPosterior& out);

/// Forward filter over rows of `F` (T x p) and `y` (T). Returns the T
/// posteriors for t = 1..T (the initial prior is not included).
std::vector<DlmPosterior> forward_filter(const DlmPosterior& initial, const Eigen::MatrixXd& F,
                                         std::span<const double> y, const Discounts& d);

struct StateTrajectory {
  Eigen::MatrixXd thetas;  // T x p, row t is theta_t
  Eigen::VectorXd vols;    // T

  Eigen::Index length() const { return vols.size(); }
};

/// Backward sampling of (theta, v)_{1:T} given the filtered posteriors.
StateTrajectory backward_sample(std::span<const DlmPosterior> filtered, const Discounts& d, Rng& rng);

/// Writes into an existing trajectory (resized if needed).
void backward_sample_into(std::span<const DlmPosterior> filtered, const Discounts& d, Rng& rng,
                          StateTrajectory& out);

/// A single joint draw (theta, v) from a normal/inverse-gamma posterior.
struct StateDraw {
  Eigen::VectorXd theta;
  double v = 1.0;
};

StateDraw draw_posterior(const DlmPosterior& post, Rng& rng);

/// Advances a state draw one step into the future:
///   v' = v * vol / gamma,  gamma ~ Beta(vol n / 2, (1 - vol) n / 2)
///   theta' = theta + omega, omega ~ N(0, W v' / s),  W = C (1 - state) / state
/// `evolution_root` is a square-root factor of W / s (see evolution_factor),
/// `n` is the degrees of freedom in force at the current step.
void propagate(StateDraw& draw, const Eigen::MatrixXd& evolution_root, double n,
               const Discounts& d, Rng& rng);

/// Square-root factor L (L L' = S) of a symmetric PSD matrix: Cholesky when
/// it succeeds, otherwise a clipped eigendecomposition.
Eigen::MatrixXd psd_root(const Eigen::MatrixXd& S);

/// Factor L with L L' = C (1 - state) / (state * s).
Eigen::MatrixXd evolution_factor(const DlmPosterior& post, const Discounts& d);

}  // namespace bps::dlm
