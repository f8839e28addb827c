#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "bps/error.hpp"
#include "bps/pipeline.hpp"
#include "fixtures.hpp"

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("bps_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Pipeline, ToyRunEmitsAllFiles) {
  const auto data = fixture::toy_data();
  const auto result = bps::run_pipeline(fixture::toy_config(), data);
  const auto dir = fresh_dir("toy");
  bps::write_outputs(result, dir);
  for (const char* name : {"forecasts.csv", "metrics.csv", "summary.json", "posterior_coefficients_k1.csv",
                           "posterior_latent_errors_k1.csv", "posterior_r2_k1.csv", "posterior_online_k1.csv",
                           "posterior_coefficients_k2.csv", "posterior_online_k2.csv"})
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  EXPECT_NE(slurp(dir / "summary.json").find("\"BPS(k)\""), std::string::npos);
}

TEST(Pipeline, EveryCombinationExactlyOnce) {
  const auto data = fixture::toy_data();
  const auto result = bps::run_pipeline(fixture::toy_config(), data);
  std::set<std::tuple<std::string, int, std::size_t>> seen;
  std::map<std::pair<std::string, int>, int> counts;
  for (const auto& r : result.forecasts) {
    EXPECT_TRUE(seen.insert({r.method, r.horizon, r.target_row}).second);
    ++counts[{r.method, r.horizon}];
  }
  const int test_quarters = static_cast<int>(result.periods.test_end - result.periods.calibrate_end);
  for (const auto& [key, n] : counts) EXPECT_EQ(n, test_quarters) << key.first << " k=" << key.second;
  // BPS, BPS(k) at k = 2 only, 2 agents, BMA, two pools.
  EXPECT_EQ(counts.size(), 6u + 7u);
  for (const auto& s : result.metrics) {
    EXPECT_EQ(s.msfe.size(), static_cast<std::size_t>(test_quarters));
    for (double m : s.msfe) EXPECT_GE(m, 0.0);
    if (s.method == "BPS")
      for (double l : s.lpdr) EXPECT_EQ(l, 0.0);
  }
}

TEST(Pipeline, BaselinesCanBeDisabled) {
  auto cfg = fixture::toy_config();
  cfg.methods.clear();
  cfg.posterior_outputs = false;
  const auto result = bps::run_pipeline(cfg, fixture::toy_data());
  std::set<std::string> methods;
  for (const auto& r : result.forecasts) methods.insert(r.method);
  EXPECT_EQ(methods, std::set<std::string>{"BPS"});
}

TEST(Pipeline, DeterministicAcrossRunsAndWorkers) {
  const auto data = fixture::toy_data();
  auto cfg = fixture::toy_config();
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b"), c = fresh_dir("det_c");
  bps::write_outputs(bps::run_pipeline(cfg, data), a);
  bps::write_outputs(bps::run_pipeline(cfg, data), b);
  cfg.workers = 3;
  bps::write_outputs(bps::run_pipeline(cfg, data), c);
  EXPECT_EQ(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));
  EXPECT_EQ(slurp(a / "forecasts.csv"), slurp(b / "forecasts.csv"));
  EXPECT_EQ(slurp(a / "metrics.csv"), slurp(c / "metrics.csv"));
}

TEST(Pipeline, NoLookAhead) {
  const auto data = fixture::toy_data();
  const auto result = bps::run_pipeline(fixture::toy_config(), data);
  EXPECT_TRUE(bps::audit_lookahead(result.forecasts, data).empty());
  const auto dir = fresh_dir("audit");
  bps::write_outputs(result, dir);
  EXPECT_TRUE(bps::audit_forecasts_csv(dir / "forecasts.csv", data).empty());

  // Perturbing every value from a cut row onward leaves all forecasts issued
  // before the cut unchanged.
  const std::size_t cut = 30;
  auto perturbed = data;
  for (const auto& name : perturbed.names())
    for (std::size_t row = cut; row < perturbed.rows(); ++row) perturbed.set(name, row, perturbed.at(name, row) + 5.0);
  const auto other = bps::run_pipeline(fixture::toy_config(), perturbed);
  ASSERT_EQ(other.forecasts.size(), result.forecasts.size());
  int checked = 0;
  for (std::size_t i = 0; i < result.forecasts.size(); ++i) {
    const auto& r = result.forecasts[i];
    if (r.issue_row >= cut) continue;
    EXPECT_EQ(r.mean, other.forecasts[i].mean) << r.method << " " << r.target_row;
    EXPECT_EQ(r.sd, other.forecasts[i].sd) << r.method << " " << r.target_row;
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(Pipeline, AuditFlagsPlantedViolation) {
  const auto data = fixture::toy_data();
  std::vector<bps::ForecastRecord> recs{{"X", 2, 28, 30, 29, 0, 0, 1, 0}, {"Y", 1, 27, 29, 28, 0, 0, 1, 0}};
  const auto v = bps::audit_lookahead(recs, data);
  ASSERT_EQ(v.size(), 2u);  // X reads past its issue date; Y has a mismatched issue row
  EXPECT_EQ(v[0].method, "X");
}

TEST(Pipeline, WarmStartRuns) {
  auto cfg = fixture::toy_config();
  cfg.warm_start = true;
  cfg.posterior_outputs = false;
  const auto result = bps::run_pipeline(cfg, fixture::toy_data());
  EXPECT_FALSE(result.forecasts.empty());
}

TEST(Pipeline, ConfigAndDataErrors) {
  const auto data = fixture::toy_data();
  auto cfg = fixture::toy_config();
  cfg.calibrate_end = "1963Q1";
  EXPECT_THROW(bps::run_pipeline(cfg, data), bps::ConfigError);
  cfg = fixture::toy_config();
  cfg.horizons = {1, 12};
  EXPECT_THROW(bps::run_pipeline(cfg, data), bps::ConfigError);
  cfg = fixture::toy_config();
  cfg.target = "zz";
  EXPECT_THROW(bps::run_pipeline(cfg, data), bps::DataError);
  cfg = fixture::toy_config();
  cfg.train_end = "2050Q1";
  EXPECT_THROW(bps::run_pipeline(cfg, data), bps::DataError);
}

TEST(Pipeline, ErrorsCarryWindowContext) {
  auto data = fixture::toy_data();
  data.set("p", 26, std::nan(""));
  try {
    bps::run_pipeline(fixture::toy_config(), data);
    FAIL() << "expected DataError";
  } catch (const bps::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("1967Q3"), std::string::npos) << e.what();
  }
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(BPS_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

TEST(Cli, ExitCodes) {
  const auto dir = fresh_dir("cli");
  fs::create_directories(dir);
  ASSERT_EQ(run_cli("simulate --out " + (dir / "sim.csv").string() + " --length 40"), 0);
  std::ofstream(dir / "bad.ini") << "bogus = 1\n";
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.ini").string()), 2);
  std::ofstream(dir / "missing.ini") << "data = nope.csv\ntrain_end = 1964Q2\ncalibrate_end = 1966Q4\n";
  EXPECT_EQ(run_cli("run --config " + (dir / "missing.ini").string()), 3);
  std::ofstream(dir / "ok.ini") << "data = sim.csv\nout = out\ntrain_end = 1964Q2\ncalibrate_end = 1966Q4\n"
                                   "horizons = 1\nagent_paths = 200\n[mcmc]\nburn_in = 20\ndraws = 50\n";
  EXPECT_EQ(run_cli("run --config " + (dir / "ok.ini").string() + " --methods agents,bma --seed 4"), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "metrics.csv"));
  EXPECT_EQ(run_cli("run --config " + (dir / "ok.ini").string() + " --horizons 0"), 2);
}

}  // namespace
