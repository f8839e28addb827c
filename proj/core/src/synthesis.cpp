#include "bps/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bps/error.hpp"

namespace bps::synthesis {

using agents::AgentPanel;
using Kind = ForecastDensity::Kind;

void BpsConfig::validate(std::size_t agents) const {
  discounts.validate();
  if (horizon < 1) throw ConfigError("BPS horizon must be >= 1");
  if (mcmc.burn_in < 0) throw ConfigError("MCMC burn-in must be >= 0");
  if (mcmc.draws < 1) throw ConfigError("MCMC retained draws must be >= 1");
  if (mcmc.thin < 1) throw ConfigError("MCMC thinning must be >= 1");
  if (prior.dim() != static_cast<Eigen::Index>(agents + 1)) {
    std::ostringstream msg;
    msg << "BPS prior dimension " << prior.dim() << " does not match 1 + J = " << agents + 1;
    throw ConfigError(msg.str());
  }
  try {
    prior.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("BPS prior: ") + e.what());
  }
}

BpsConfig BpsConfig::one_step(std::size_t agents) {
  Eigen::VectorXd m0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(agents + 1),
                                                 1.0 / static_cast<double>(agents));
  m0(0) = 0.0;
  BpsConfig cfg;
  cfg.prior = dlm::make_prior(m0, 1.0, 10.0, 0.002);
  cfg.discounts = {0.95, 0.99};
  cfg.horizon = 1;
  cfg.mode = Mode::direct;
  return cfg;
}

BpsConfig BpsConfig::customized(std::size_t agents, int k) {
  BpsConfig cfg = one_step(agents);
  cfg.prior.C *= 1e-4;
  cfg.discounts = {0.99, 0.99};
  cfg.horizon = k;
  cfg.mode = Mode::customized;
  return cfg;
}

namespace {

// Flattened view of the panel used inside the sampler loops.
struct PanelCells {
  Eigen::Index T = 0;
  Eigen::Index J = 0;
  Eigen::MatrixXd h;
  Eigen::MatrixXd H;
  Eigen::MatrixXd dof;
  std::vector<Kind> kind;                     // row-major T x J
  std::vector<const ForecastDensity*> cell;   // row-major T x J
  std::vector<bool> row_has_samples;

  explicit PanelCells(const AgentPanel& panel) {
    T = static_cast<Eigen::Index>(panel.periods());
    J = static_cast<Eigen::Index>(panel.agents());
    h.resize(T, J);
    H.resize(T, J);
    dof.setZero(T, J);
    kind.resize(static_cast<std::size_t>(T * J));
    cell.resize(static_cast<std::size_t>(T * J));
    row_has_samples.assign(static_cast<std::size_t>(T), false);
    for (Eigen::Index t = 0; t < T; ++t) {
      for (Eigen::Index j = 0; j < J; ++j) {
        const ForecastDensity& d = panel.densities[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
        const auto idx = static_cast<std::size_t>(t * J + j);
        kind[idx] = d.kind;
        cell[idx] = &d;
        h(t, j) = d.loc;
        H(t, j) = d.scale;
        if (d.kind == Kind::student_t) dof(t, j) = d.dof;
        if (d.kind == Kind::samples) row_has_samples[static_cast<std::size_t>(t)] = true;
      }
    }
  }

  Kind kind_at(Eigen::Index t, Eigen::Index j) const { return kind[static_cast<std::size_t>(t * J + j)]; }
  const ForecastDensity& at(Eigen::Index t, Eigen::Index j) const { return *cell[static_cast<std::size_t>(t * J + j)]; }
};

std::size_t draw_categorical(const std::vector<double>& log_w, Rng& rng) {
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  std::vector<double> w(log_w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_w[i] - top);
    total += w[i];
  }
  double u = draw_uniform(rng) * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    u -= w[i];
    if (u <= 0.0) return i;
  }
  return w.size() - 1;
}

// Exact draw from N(h + b c, diag(H) - b b' g) by conditioning a joint prior
// draw on the observed outcome; no factorisation is needed.
void draw_conditional_normal(const Eigen::Ref<const Eigen::VectorXd>& loadings, double intercept,
                             double v, double y, const Eigen::VectorXd& h, const Eigen::VectorXd& H,
                             const std::vector<bool>& active, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> x, Rng& rng) {
  const Eigen::Index J = h.size();
  double y_sim = intercept + std::sqrt(v) * draw_normal(rng);
  double g = v;
  double offset = 0.0;  // contribution of inactive (fixed) cells
  for (Eigen::Index j = 0; j < J; ++j) {
    if (!active[static_cast<std::size_t>(j)]) {
      offset += loadings(j) * x(j);
      continue;
    }
    x(j) = h(j) + std::sqrt(H(j)) * draw_normal(rng);
    y_sim += loadings(j) * x(j);
    g += loadings(j) * loadings(j) * H(j);
  }
  const double gap = (y - offset) - y_sim;
  for (Eigen::Index j = 0; j < J; ++j) {
    if (active[static_cast<std::size_t>(j)]) x(j) += H(j) * loadings(j) / g * gap;
  }
}

void sample_latents_impl(const dlm::StateTrajectory& traj, const PanelCells& cells,
                         std::span<const double> outcomes, LatentStates& lat, Rng& rng) {
  const Eigen::Index T = cells.T;
  const Eigen::Index J = cells.J;
  Eigen::VectorXd h(J), H(J);
  std::vector<bool> active(static_cast<std::size_t>(J));
  std::vector<double> log_w;

  for (Eigen::Index t = 0; t < T; ++t) {
    const auto theta = traj.thetas.row(t);
    const double v = traj.vols(t);
    const double y = outcomes[static_cast<std::size_t>(t)];
    const auto loadings = theta.tail(J).transpose();
    auto x = lat.x.row(t);

    bool any_analytic = false;
    for (Eigen::Index j = 0; j < J; ++j) {
      const Kind k = cells.kind_at(t, j);
      active[static_cast<std::size_t>(j)] = k != Kind::samples;
      any_analytic = any_analytic || k != Kind::samples;
      h(j) = cells.h(t, j);
      H(j) = k == Kind::student_t ? cells.H(t, j) / lat.phi(t, j) : cells.H(t, j);
    }

    if (!cells.row_has_samples[static_cast<std::size_t>(t)]) {
      draw_conditional_normal(loadings, theta(0), v, y, h, H, active, x, rng);
    } else if (!any_analytic) {
      // Joint importance resampling over collated draw vectors.
      std::size_t I = cells.at(t, 0).draws.size();
      for (Eigen::Index j = 1; j < J; ++j) I = std::min(I, cells.at(t, j).draws.size());
      log_w.resize(I);
      for (std::size_t i = 0; i < I; ++i) {
        double mu = theta(0);
        for (Eigen::Index j = 0; j < J; ++j) mu += theta(j + 1) * cells.at(t, j).draws[i];
        log_w[i] = -0.5 * (y - mu) * (y - mu) / v;
      }
      const std::size_t pick = draw_categorical(log_w, rng);
      for (Eigen::Index j = 0; j < J; ++j) x(j) = cells.at(t, j).draws[pick];
    } else {
      // Mixed row: analytic cells given the sample cells, then each sample
      // cell by importance resampling given the rest.
      draw_conditional_normal(loadings, theta(0), v, y, h, H, active, x, rng);
      for (Eigen::Index j = 0; j < J; ++j) {
        if (active[static_cast<std::size_t>(j)]) continue;
        double rest = theta(0);
        for (Eigen::Index i = 0; i < J; ++i)
          if (i != j) rest += theta(i + 1) * x(i);
        const auto& pool = cells.at(t, j).draws;
        log_w.resize(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) {
          const double r = y - rest - theta(j + 1) * pool[i];
          log_w[i] = -0.5 * r * r / v;
        }
        x(j) = pool[draw_categorical(log_w, rng)];
      }
    }

    for (Eigen::Index j = 0; j < J; ++j) {
      if (cells.kind_at(t, j) != Kind::student_t) continue;
      const double n = cells.dof(t, j);
      const double dev = x(j) - cells.h(t, j);
      const double d = dev * dev / cells.H(t, j);
      lat.phi(t, j) = draw_gamma(rng, 0.5 * (n + 1.0), 0.5 * (n + d));
    }
  }
}

void check_outcomes(const AgentPanel& panel) {
  for (std::size_t t = 0; t < panel.outcomes.size(); ++t)
    if (!std::isfinite(panel.outcomes[t])) {
      std::ostringstream msg;
      msg << "BPS panel has a missing outcome at panel row " << t;
      throw DataError(msg.str());
    }
}

}  // namespace

LatentStates init_latents(const AgentPanel& panel, Rng& rng, LatentInit init) {
  const auto T = static_cast<Eigen::Index>(panel.periods());
  const auto J = static_cast<Eigen::Index>(panel.agents());
  LatentStates lat{Eigen::MatrixXd(T, J), Eigen::MatrixXd::Ones(T, J)};
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index j = 0; j < J; ++j) {
      const ForecastDensity& d = panel.densities[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
      switch (d.kind) {
        case Kind::student_t: {
          const double phi = draw_gamma(rng, 0.5 * d.dof, 0.5 * d.dof);
          lat.phi(t, j) = phi;
          lat.x(t, j) = d.loc + std::sqrt(d.scale / phi) * draw_normal(rng);
          break;
        }
        case Kind::normal:
        case Kind::samples:
          lat.x(t, j) = d.draw(rng);
          break;
      }
      if (init == LatentInit::outcomes) lat.x(t, j) = panel.outcomes[static_cast<std::size_t>(t)];
    }
  }
  return lat;
}

LatentConditional latent_conditional(const Eigen::VectorXd& theta, double v, double y,
                                     const Eigen::VectorXd& h, const Eigen::VectorXd& H) {
  const Eigen::Index J = h.size();
  if (theta.size() != J + 1 || H.size() != J)
    throw std::invalid_argument("latent_conditional: dimension mismatch");
  if (!(v > 0.0)) throw std::invalid_argument("latent_conditional: v must be > 0");
  if ((H.array() <= 0.0).any()) throw std::invalid_argument("latent_conditional: H must be > 0");

  const Eigen::VectorXd loadings = theta.tail(J);
  LatentConditional out;
  out.c = y - theta(0) - h.dot(loadings);
  out.g = v + loadings.dot(H.cwiseProduct(loadings));
  if (!(out.g > 0.0)) throw NumericalError("latent_conditional: non-positive marginal variance");
  out.b = H.cwiseProduct(loadings) / out.g;
  out.mean = h + out.b * out.c;
  out.cov = Eigen::MatrixXd(H.asDiagonal()) - out.b * out.b.transpose() * out.g;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

void sample_latents(const dlm::StateTrajectory& trajectory, const AgentPanel& panel,
                    LatentStates& latents, Rng& rng) {
  if (trajectory.length() != static_cast<Eigen::Index>(panel.periods()))
    throw std::invalid_argument("sample_latents: trajectory length differs from the panel");
  const PanelCells cells(panel);
  sample_latents_impl(trajectory, cells, panel.outcomes, latents, rng);
}

PosteriorDraws gibbs(const AgentPanel& panel, const BpsConfig& cfg, Rng& rng, const LatentStates* start) {
  cfg.validate(panel.agents());
  panel.validate();
  if (panel.horizon != cfg.panel_horizon()) {
    std::ostringstream msg;
    msg << "panel horizon " << panel.horizon << " does not match the BPS configuration ("
        << cfg.panel_horizon() << ")";
    throw ConfigError(msg.str());
  }
  if (panel.periods() == 0) throw DataError("BPS panel is empty");
  check_outcomes(panel);

  const PanelCells cells(panel);
  const Eigen::Index T = cells.T;
  const Eigen::Index J = cells.J;

  LatentStates lat = init_latents(panel, rng, cfg.init);
  if (start) {
    // Warm start: reuse the leading rows of a previous chain's latents.
    const Eigen::Index rows = std::min(T, start->x.rows());
    if (start->x.cols() != J || start->phi.cols() != J)
      throw std::invalid_argument("gibbs: warm-start latents have the wrong number of agents");
    lat.x.topRows(rows) = start->x.topRows(rows);
    lat.phi.topRows(rows) = start->phi.topRows(rows);
  }
  Eigen::MatrixXd F(T, J + 1);
  F.col(0).setOnes();

  std::vector<dlm::DlmPosterior> filtered(static_cast<std::size_t>(T));
  dlm::StateTrajectory traj;
  Eigen::VectorXd Ft(J + 1);

  PosteriorDraws out;
  const auto keep = static_cast<std::size_t>(cfg.mcmc.draws);
  out.terminal.reserve(keep);
  if (cfg.mcmc.keep_paths) {
    out.trajectories.reserve(keep);
    out.latents.reserve(keep);
  }

  const long total = static_cast<long>(cfg.mcmc.burn_in) + static_cast<long>(cfg.mcmc.draws) * cfg.mcmc.thin;
  for (long it = 0; it < total; ++it) {
    // Block 1: FFBS for (theta, v) given x.
    F.rightCols(J) = lat.x;
    const dlm::DlmPosterior* prev = &cfg.prior;
    for (Eigen::Index t = 0; t < T; ++t) {
      Ft = F.row(t).transpose();
      dlm::filter_update_into(*prev, Ft, panel.outcomes[static_cast<std::size_t>(t)], cfg.discounts,
                              filtered[static_cast<std::size_t>(t)]);
      prev = &filtered[static_cast<std::size_t>(t)];
    }
    dlm::backward_sample_into(filtered, cfg.discounts, rng, traj);

    // Block 2: x given (theta, v).
    sample_latents_impl(traj, cells, panel.outcomes, lat, rng);

    const long kept = it - cfg.mcmc.burn_in;
    if (kept >= 0 && (kept + 1) % cfg.mcmc.thin == 0) {
      TerminalState term;
      term.state.theta = traj.thetas.row(T - 1).transpose();
      term.state.v = traj.vols(T - 1);
      term.posterior = filtered.back();
      out.terminal.push_back(std::move(term));
      if (cfg.mcmc.keep_paths) {
        out.trajectories.push_back(traj);
        out.latents.push_back(lat);
      }
    }
  }
  out.last = std::move(lat);
  return out;
}

std::vector<double> forecast_k_direct(const PosteriorDraws& draws,
                                      std::span<const ForecastDensity> future_densities, int k,
                                      const BpsConfig& cfg, Rng& rng) {
  if (k < 1) throw std::invalid_argument("forecast_k_direct: horizon must be >= 1");
  if (draws.size() == 0) throw std::invalid_argument("forecast: no posterior draws");
  const auto J = static_cast<Eigen::Index>(future_densities.size());
  if (draws.terminal.front().state.theta.size() != J + 1)
    throw std::invalid_argument("forecast: number of agent densities does not match the model");

  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& term : draws.terminal) {
    dlm::StateDraw state = term.state;
    const Eigen::MatrixXd root = dlm::evolution_factor(term.posterior, cfg.discounts);
    double n = term.posterior.n;
    for (int step = 0; step < k; ++step) {
      dlm::propagate(state, root, n, cfg.discounts, rng);
      n *= cfg.discounts.vol;
    }
    double mu = state.theta(0);
    for (Eigen::Index j = 0; j < J; ++j)
      mu += state.theta(j + 1) * future_densities[static_cast<std::size_t>(j)].draw(rng);
    out.push_back(mu + std::sqrt(state.v) * draw_normal(rng));
  }
  return out;
}

std::vector<double> forecast_one_step(const PosteriorDraws& draws,
                                      std::span<const ForecastDensity> next_densities,
                                      const BpsConfig& cfg, Rng& rng) {
  return forecast_k_direct(draws, next_densities, 1, cfg, rng);
}

BpsRun run_bps_k(const AgentPanel& panel, std::span<const ForecastDensity> next_densities,
                 const BpsConfig& cfg, Rng& rng) {
  if (cfg.mode != Mode::customized || panel.horizon != cfg.horizon) {
    std::ostringstream msg;
    msg << "BPS(k) needs a customized configuration whose horizon matches the panel (panel "
        << panel.horizon << ", config " << cfg.horizon << ")";
    throw ConfigError(msg.str());
  }
  BpsRun run;
  run.draws = gibbs(panel, cfg, rng);
  run.forecast = forecast_k_direct(run.draws, next_densities, cfg.horizon, cfg, rng);
  return run;
}

}  // namespace bps::synthesis
