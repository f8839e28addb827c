#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bps/agents.hpp"
#include "bps/series.hpp"

namespace bps::sim {

struct Term {
  std::string series;
  int lag = 1;
  double coefficient = 0.0;
};

/// One generating model: y_t = intercept + sum coefficient * series_{t-lag} + noise.
struct Regime {
  std::string name;
  double intercept = 0.0;
  std::vector<Term> terms;
};

/// Exogenous AR(1) series: z_t = mean + ar (z_{t-1} - mean) + sd e_t.
struct Exogenous {
  std::string name;
  double mean = 0.0;
  double ar = 0.0;
  double sd = 1.0;
};

struct SimConfig {
  int length = 200;
  std::string target = "p";
  std::vector<Regime> regimes;
  std::vector<Exogenous> exogenous;
  double switch_prob = 0.02;
  /// Explicit regime index per period; overrides switch_prob when set.
  std::optional<std::vector<int>> regime_path;
  double noise = 0.1;    // observation SD of the target
  double initial = 0.0;  // pre-sample value of the target
  int burn_in = 50;      // discarded warm-up periods, all under the first regime
  std::string start_date = "1961Q1";
  std::uint64_t seed = 1;

  void validate() const;
};

/// Four regimes matching the standard agent forms over p, r, u, with r and u
/// as persistent AR(1) series.
SimConfig default_config();

struct SimResult {
  SeriesTable data;
  std::vector<int> regimes;  // one label per emitted period
  std::vector<std::string> regime_names;
};

SimResult generate(const SimConfig& cfg);

/// Quarterly labels starting at `start` ("YYYYQn").
std::vector<std::string> quarterly_labels(const std::string& start, int count);

/// Data CSV in the ingestion schema plus a (date, regime) sidecar.
void write_simulation(const SimResult& result, const SimConfig& cfg, const std::filesystem::path& data_csv,
                      const std::filesystem::path& regime_csv);

/// One agent per regime whose coefficients are pinned at the generating
/// values: unit discounts, a near-degenerate prior and observation variance
/// noise^2. These are the "known model" forecasters of a simulation study.
std::vector<agents::AgentSpec> regime_agents(const SimConfig& cfg);

}  // namespace bps::sim
