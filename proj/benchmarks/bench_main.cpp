#include <benchmark/benchmark.h>

#include <vector>

#include "bps/dlm.hpp"
#include "bps/pools.hpp"
#include "bps/random.hpp"
#include "bps/synthesis.hpp"

namespace {

bps::agents::AgentPanel random_panel(std::size_t T, std::size_t J, std::uint64_t seed) {
  bps::Rng rng = bps::make_rng(seed);
  bps::agents::AgentPanel panel;
  panel.horizon = 1;
  for (std::size_t j = 0; j < J; ++j) panel.agent_names.push_back("A" + std::to_string(j));
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<bps::ForecastDensity> row;
    for (std::size_t j = 0; j < J; ++j)
      row.push_back(bps::ForecastDensity::student_t(bps::draw_normal(rng), 0.05, 12.0));
    panel.targets.push_back(t + 10);
    panel.densities.push_back(std::move(row));
    panel.outcomes.push_back(bps::draw_normal(rng));
  }
  return panel;
}

void BM_ForwardFilter(benchmark::State& state) {
  const auto T = static_cast<Eigen::Index>(state.range(0));
  const Eigen::Index p = 5;
  bps::Rng rng = bps::make_rng(1);
  Eigen::MatrixXd F = Eigen::MatrixXd::Random(T, p);
  std::vector<double> y(static_cast<std::size_t>(T));
  for (auto& v : y) v = bps::draw_normal(rng);
  const auto prior = bps::dlm::make_prior(Eigen::VectorXd::Zero(p), 1.0, 10.0, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(bps::dlm::forward_filter(prior, F, y, {0.95, 0.99}));
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_ForwardFilter)->Arg(100)->Arg(200);

void BM_BackwardSample(benchmark::State& state) {
  const auto T = static_cast<Eigen::Index>(state.range(0));
  const Eigen::Index p = 5;
  bps::Rng rng = bps::make_rng(2);
  Eigen::MatrixXd F = Eigen::MatrixXd::Random(T, p);
  std::vector<double> y(static_cast<std::size_t>(T));
  for (auto& v : y) v = bps::draw_normal(rng);
  const auto prior = bps::dlm::make_prior(Eigen::VectorXd::Zero(p), 1.0, 10.0, 0.01);
  const auto filtered = bps::dlm::forward_filter(prior, F, y, {0.95, 0.99});
  bps::dlm::StateTrajectory traj;
  for (auto _ : state) {
    bps::dlm::backward_sample_into(filtered, {0.95, 0.99}, rng, traj);
    benchmark::DoNotOptimize(traj.thetas.data());
  }
  state.SetItemsProcessed(state.iterations() * T);
}
BENCHMARK(BM_BackwardSample)->Arg(100)->Arg(200);

void BM_SampleLatents(benchmark::State& state) {
  const auto panel = random_panel(static_cast<std::size_t>(state.range(0)), 4, 3);
  bps::Rng rng = bps::make_rng(4);
  auto lat = bps::synthesis::init_latents(panel, rng);
  bps::dlm::StateTrajectory traj;
  traj.thetas = Eigen::MatrixXd::Constant(state.range(0), 5, 0.25);
  traj.vols = Eigen::VectorXd::Constant(state.range(0), 0.05);
  for (auto _ : state) {
    bps::synthesis::sample_latents(traj, panel, lat, rng);
    benchmark::DoNotOptimize(lat.x.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleLatents)->Arg(100)->Arg(200);

void BM_GibbsSweeps(benchmark::State& state) {
  const auto panel = random_panel(static_cast<std::size_t>(state.range(0)), 4, 5);
  auto cfg = bps::synthesis::BpsConfig::one_step(4);
  cfg.mcmc = {100, 400, 1, false};
  for (auto _ : state) {
    bps::Rng rng = bps::make_rng(6);
    benchmark::DoNotOptimize(bps::synthesis::gibbs(panel, cfg, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 500);
}
BENCHMARK(BM_GibbsSweeps)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_LogPool(benchmark::State& state) {
  std::vector<bps::ForecastDensity> comps;
  for (int j = 0; j < 4; ++j) comps.push_back(bps::ForecastDensity::student_t(0.1 * j, 0.04, 15.0));
  for (auto _ : state) benchmark::DoNotOptimize(bps::pools::log_pool(comps));
}
BENCHMARK(BM_LogPool);

}  // namespace

BENCHMARK_MAIN();
