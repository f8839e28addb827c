#pragma once

#include <string>
#include <vector>

#include "bps/agents.hpp"
#include "bps/random.hpp"

namespace fixture {

/// Panel of analytic agent densities with the given per-cell locations and
/// squared scales; outcomes supplied by the caller.
inline bps::agents::AgentPanel panel_from(const Eigen::MatrixXd& loc, const Eigen::MatrixXd& scale,
                                          const std::vector<double>& outcomes, double dof = 0.0) {
  bps::agents::AgentPanel panel;
  panel.horizon = 1;
  for (Eigen::Index j = 0; j < loc.cols(); ++j) panel.agent_names.push_back("A" + std::to_string(j + 1));
  for (Eigen::Index t = 0; t < loc.rows(); ++t) {
    std::vector<bps::ForecastDensity> row;
    for (Eigen::Index j = 0; j < loc.cols(); ++j)
      row.push_back(dof > 0.0 ? bps::ForecastDensity::student_t(loc(t, j), scale(t, j), dof)
                              : bps::ForecastDensity::normal(loc(t, j), scale(t, j)));
    panel.targets.push_back(static_cast<std::size_t>(t) + 10);
    panel.densities.push_back(std::move(row));
  }
  panel.outcomes = outcomes;
  return panel;
}

/// Random panel where y_t = 0.1 + 0.6 x_t1 + 0.4 x_t2 + noise and x_tj are
/// drawn from the agents' normal densities.
inline bps::agents::AgentPanel synthetic_panel(int T, std::uint64_t seed, int J = 2) {
  bps::Rng rng = bps::make_rng(seed);
  Eigen::MatrixXd loc(T, J), scale = Eigen::MatrixXd::Constant(T, J, 0.04);
  std::vector<double> y(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    double mu = 0.1;
    for (int j = 0; j < J; ++j) {
      loc(t, j) = 1.0 + 0.5 * bps::draw_normal(rng);
      mu += (j == 0 ? 0.6 : 0.4 / (J - 1)) * (loc(t, j) + 0.2 * bps::draw_normal(rng));
    }
    y[static_cast<std::size_t>(t)] = mu + 0.1 * bps::draw_normal(rng);
  }
  return panel_from(loc, scale, y);
}

}  // namespace fixture

#include "bps/config.hpp"
#include "bps/simgen.hpp"

namespace fixture {

/// Toy pipeline: 40 simulated quarters, two agents, 200 kept MCMC draws.
inline bps::PipelineConfig toy_config() {
  bps::PipelineConfig cfg;
  cfg.data = "in-memory";
  cfg.target = "p";
  cfg.train_end = "1964Q2";     // row 13
  cfg.calibrate_end = "1966Q4";  // row 23
  cfg.horizons = {1, 2};
  cfg.agents = {
      {"M1", "p", {{"p", 1}}, true, {0.99, 0.95}, std::nullopt},
      {"M4", "p", {{"p", 1}, {"r", 1}, {"u", 1}}, true, {0.99, 0.95}, std::nullopt},
  };
  for (int k : {1, 2}) {
    auto spec = bps::BpsSpec::defaults(k);
    spec.mcmc = {100, 200, 1, false};
    cfg.bps[k] = spec;
  }
  cfg.agent_paths = 500;
  cfg.seed = 2024;
  return cfg;
}

inline bps::SeriesTable toy_data(std::uint64_t seed = 8) {
  auto sim = bps::sim::default_config();
  sim.length = 40;
  sim.seed = seed;
  return bps::sim::generate(sim).data;
}

}  // namespace fixture
