#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bps/agents.hpp"
#include "bps/series.hpp"
#include "bps/synthesis.hpp"

namespace bps {

/// Synthesis settings for one horizon; expanded to a BpsConfig once the
/// number of agents is known.
struct BpsSpec {
  dlm::Discounts discounts{0.95, 0.99};
  double n0 = 10.0;
  double s0 = 0.002;
  double c0 = 1.0;                 // C0 = c0 * I
  std::optional<std::vector<double>> m0;  // default (0, 1/J, ..., 1/J)
  synthesis::McmcSettings mcmc;

  /// k = 1: the one-step defaults; k > 1: C0 = 1e-4 I, discounts (0.99, 0.99).
  static BpsSpec defaults(int k);
  synthesis::BpsConfig resolve(std::size_t agents, int horizon, synthesis::Mode mode) const;
};

/// Forecasting methods that can be switched off. BPS itself always runs.
enum class Method { bps_k, agents, bma, linear_pool, log_pool };
Method parse_method(const std::string& token);
std::string method_token(Method m);
std::set<Method> all_methods();

struct PipelineConfig {
  std::filesystem::path data;
  ColumnMapping columns;
  std::string target = "p";
  std::string train_end;
  std::string calibrate_end;
  std::string test_end;  // empty: last row
  std::vector<int> horizons{1};
  std::vector<agents::AgentSpec> agents;  // empty: standard set over p, r, u
  std::map<int, BpsSpec> bps;             // per horizon; missing entries use defaults
  std::set<Method> methods = all_methods();
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  int workers = 1;
  bool warm_start = false;
  int agent_paths = 5000;
  std::optional<double> kde_bandwidth;
  bool posterior_outputs = true;

  BpsSpec bps_for(int k) const;
  /// Replaces the number of kept draws everywhere.
  void set_mcmc_draws(int draws);
  void validate() const;
};

/// Reads an INI document. Top-level keys, optional [mcmc] defaults, and
/// [agent NAME] / [bps K] sections. Throws ConfigError on bad input.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

std::vector<int> parse_int_list(const std::string& text);

}  // namespace bps
