#include <gtest/gtest.h>

#include <cmath>

#include "bps/agents.hpp"
#include "bps/error.hpp"
#include "bps/simgen.hpp"

namespace {

using namespace bps::agents;

bps::SeriesTable sim_data(int T = 120, std::uint64_t seed = 3) {
  auto cfg = bps::sim::default_config();
  cfg.length = T;
  cfg.seed = seed;
  return bps::sim::generate(cfg).data;
}

TEST(Agents, StandardSetShapes) {
  const auto specs = standard_agents();
  ASSERT_EQ(specs.size(), 4u);
  EXPECT_EQ(specs[0].state_dim(), 2u);
  EXPECT_EQ(specs[1].state_dim(), 10u);
  EXPECT_EQ(specs[2].state_dim(), 4u);
  EXPECT_EQ(specs[3].state_dim(), 4u);
  EXPECT_EQ(specs[1].max_lag(), 3);
  const auto prior = specs[0].initial_prior();
  EXPECT_EQ(prior.n, 2.0);
  EXPECT_EQ(prior.s, 0.01);
  EXPECT_EQ(specs[0].discounts.state, 0.99);
  EXPECT_EQ(specs[0].discounts.vol, 0.95);
}

TEST(Agents, OneStepIsFilterPredictive) {
  const auto data = sim_data();
  const auto spec = standard_agents()[3];
  const auto fit = build_agent(spec, data);
  const std::size_t issue = 60;
  const auto d = agent_forecast(fit, data, issue, 1, 0);
  const auto [post, stats] = bps::dlm::filter_update(fit.posterior_after(issue), regressors(spec, data, issue + 1),
                                                     data.at("p", issue + 1), spec.discounts);
  EXPECT_EQ(d.kind, bps::ForecastDensity::Kind::student_t);
  EXPECT_NEAR(d.loc, stats.f, 1e-12);
  EXPECT_NEAR(d.scale, stats.q, 1e-12);
  EXPECT_NEAR(d.dof, stats.dof, 1e-12);
  EXPECT_NEAR(post.m(0), fit.posterior_after(issue + 1).m(0), 1e-12);
}

TEST(Agents, TwoStepIteratedArMean) {
  // Static AR(1) agent: E y_{t+2} = E[a + a b] + E[b^2] y_t with the
  // Student-T posterior covariance C n / (n - 2).
  const auto data = sim_data(80, 5);
  AgentSpec spec{"ar", "p", {{"p", 1}}, true, {1.0, 1.0}, std::nullopt};
  const auto fit = build_agent(spec, data);
  const std::size_t issue = 70;
  const auto& post = fit.posterior_after(issue);
  const double inflate = post.n / (post.n - 2.0);
  const double a = post.m(0), b = post.m(1);
  const double expected = a + a * b + post.C(0, 1) * inflate + (b * b + post.C(1, 1) * inflate) * data.at("p", issue);
  const auto d = agent_forecast(fit, data, issue, 2, 99, {200000});
  EXPECT_NEAR(d.loc, expected, 0.01);
  EXPECT_NEAR(d.dof, post.n, 1e-12);
}

TEST(Agents, KStepDofDiscounted) {
  const auto data = sim_data();
  const auto fit = build_agent(standard_agents()[0], data);
  const auto d = agent_forecast(fit, data, 90, 4, 1, {2000});
  EXPECT_NEAR(d.dof, std::pow(0.95, 4) * fit.posterior_after(90).n, 1e-12);
  EXPECT_GT(d.scale, agent_forecast(fit, data, 90, 1, 1).scale);
}

TEST(Agents, ForecastIgnoresFutureData) {
  auto data = sim_data();
  const std::size_t issue = 70;
  const auto specs = standard_agents();
  std::vector<bps::ForecastDensity> before;
  for (const auto& s : specs) before.push_back(agent_forecast(build_agent(s, data), data, issue, 3, 17, {500}));
  for (const auto& name : data.names())
    for (std::size_t row = issue + 1; row < data.rows(); ++row) data.set(name, row, 1e3);
  for (std::size_t j = 0; j < specs.size(); ++j) {
    const auto after = agent_forecast(build_agent(specs[j], data), data, issue, 3, 17, {500});
    EXPECT_EQ(after.loc, before[j].loc);
    EXPECT_EQ(after.scale, before[j].scale);
  }
}

TEST(Agents, PanelCellsAreRecomputable) {
  const auto data = sim_data();
  std::vector<AgentFit> fits;
  for (const auto& s : standard_agents()) fits.push_back(build_agent(s, data));
  const auto panel = assemble_panel(fits, data, 40, 60, 4, 11, {300});
  ASSERT_EQ(panel.periods(), 21u);
  EXPECT_EQ(panel.issue_row(0), 36u);
  EXPECT_EQ(panel.outcomes[5], data.at("p", 45));
  const auto cell = agent_forecast(fits[2], data, 36 + 5, 4, cell_seed(11, 2, 41, 4), {300});
  EXPECT_EQ(panel.densities[5][2].loc, cell.loc);
  const auto sl = panel.slice(3, 4);
  EXPECT_EQ(sl.targets.front(), 43u);
  EXPECT_EQ(sl.periods(), 4u);
}

TEST(Agents, PanelTooEarlyThrows) {
  const auto data = sim_data();
  std::vector<AgentFit> fits;
  for (const auto& s : standard_agents()) fits.push_back(build_agent(s, data));
  EXPECT_THROW(assemble_panel(fits, data, 1, 10, 1, 0), bps::DataError);
}

TEST(Agents, MissingValueIsDataError) {
  auto data = sim_data();
  data.set("r", 30, std::nan(""));
  EXPECT_THROW(build_agent(standard_agents()[1], data), bps::DataError);
  EXPECT_NO_THROW(build_agent(standard_agents()[0], data));
}

}  // namespace
