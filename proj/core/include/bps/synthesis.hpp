#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bps/agents.hpp"
#include "bps/density.hpp"
#include "bps/dlm.hpp"
#include "bps/random.hpp"

// Dynamic latent-factor Bayesian predictive synthesis.
//
// The decision model is the DLM
//   y_t = F_t' theta_t + nu_t,  F_t = (1, x_t1, ..., x_tJ)',  nu_t ~ N(0, v_t)
//   theta_t = theta_{t-1} + omega_t  (state discount), v_t beta-gamma (vol discount)
// where each latent agent state x_tj is an independent draw from the agent's
// forecast density h_tj. Posterior sampling alternates FFBS for (theta, v)
// given x with conditionally independent per-time draws of x given (theta, v).
namespace bps::synthesis {

/// How a horizon-k forecast is produced. `direct` projects a model fitted on
/// 1-step densities k steps ahead; `customized` fits on k-step densities.
enum class Mode { direct, customized };

/// Starting values for the latent agent states.
enum class LatentInit { agent_priors, outcomes };

struct McmcSettings {
  int burn_in = 3000;
  int draws = 5000;
  int thin = 1;
  /// When false only the terminal state of each draw is retained.
  bool keep_paths = true;
};

struct BpsConfig {
  dlm::Discounts discounts{0.95, 0.99};
  dlm::DlmPosterior prior;
  int horizon = 1;
  Mode mode = Mode::direct;
  McmcSettings mcmc;
  LatentInit init = LatentInit::agent_priors;

  /// Horizon of the agent panel the sampler must be fed.
  int panel_horizon() const { return mode == Mode::customized ? horizon : 1; }
  void validate(std::size_t agents) const;

  /// m0 = (0, 1/J, ..., 1/J), C0 = I, n0 = 10, s0 = 0.002, discounts (0.95, 0.99).
  static BpsConfig one_step(std::size_t agents);
  /// BPS(k): as one_step but C0 = 1e-4 I and discounts (0.99, 0.99).
  static BpsConfig customized(std::size_t agents, int k);
};

struct LatentStates {
  Eigen::MatrixXd x;    // T x J
  Eigen::MatrixXd phi;  // T x J Student-T mixing scales; 1 for other cells
};

/// Conditional N(mean, cov) of x_t given (theta_t, v_t, y_t) and independent
/// normal agent densities N(h, diag(H)).
struct LatentConditional {
  double c = 0.0;
  double g = 1.0;
  Eigen::VectorXd b;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

struct TerminalState {
  dlm::StateDraw state;           // (theta_T, v_T)
  dlm::DlmPosterior posterior;    // filtered posterior at T within the same sweep
};

struct PosteriorDraws {
  std::vector<dlm::StateTrajectory> trajectories;  // empty unless keep_paths
  std::vector<LatentStates> latents;               // empty unless keep_paths
  std::vector<TerminalState> terminal;
  LatentStates last;  // latents after the final sweep

  std::size_t size() const { return terminal.size(); }
};

LatentStates init_latents(const agents::AgentPanel& panel, Rng& rng,
                          LatentInit init = LatentInit::agent_priors);

LatentConditional latent_conditional(const Eigen::VectorXd& theta, double v, double y,
                                     const Eigen::VectorXd& h, const Eigen::VectorXd& H);

/// One conditional draw of x_{1:T} given (theta, v)_{1:T}, followed by a
/// refresh of the Student-T mixing scales. `latents.phi` is read and updated.
void sample_latents(const dlm::StateTrajectory& trajectory, const agents::AgentPanel& panel,
                    LatentStates& latents, Rng& rng);

/// Two-block Gibbs sampler over (theta, v)_{1:T} and x_{1:T}.
/// `start`, when given, seeds the latents of its leading rows (warm start).
PosteriorDraws gibbs(const agents::AgentPanel& panel, const BpsConfig& cfg, Rng& rng,
                     const LatentStates* start = nullptr);

/// Synthetic futures for y_{T+1}: evolve each retained (theta_T, v_T) one
/// step, draw x_{T+1} from the agents' next densities, then y.
std::vector<double> forecast_one_step(const PosteriorDraws& draws,
                                      std::span<const ForecastDensity> next_densities,
                                      const BpsConfig& cfg, Rng& rng);

/// As forecast_one_step but evolving (theta, v) k steps and using the agents'
/// densities for T + k.
std::vector<double> forecast_k_direct(const PosteriorDraws& draws,
                                      std::span<const ForecastDensity> future_densities, int k,
                                      const BpsConfig& cfg, Rng& rng);

struct BpsRun {
  PosteriorDraws draws;
  std::vector<double> forecast;
};

/// BPS(k): Gibbs on a panel of k-step densities, then a k-step projection
/// using the agents' current k-step densities.
BpsRun run_bps_k(const agents::AgentPanel& panel, std::span<const ForecastDensity> next_densities,
                 const BpsConfig& cfg, Rng& rng);

}  // namespace bps::synthesis
