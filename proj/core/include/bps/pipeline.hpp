#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "bps/config.hpp"
#include "bps/eval.hpp"
#include "bps/series.hpp"

namespace bps {

/// One issued forecast. `info_through` is the last data row any input to the
/// forecast depended on.
struct ForecastRecord {
  std::string method;
  int horizon = 1;
  std::size_t issue_row = 0;
  std::size_t target_row = 0;
  std::size_t info_through = 0;
  double mean = 0.0;
  double sd = 0.0;
  double density = 0.0;  // predictive density at the realised outcome
  double outcome = 0.0;
};

/// Summary of a coefficient or latent quantity at one date.
struct Band {
  std::size_t row = 0;
  std::string name;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct PosteriorSummary {
  int horizon = 1;
  std::vector<Band> coefficients;  // retrospective theta_t on the full window
  std::vector<Band> online;        // terminal theta of each expanding-window run
  std::vector<Band> latent_errors; // y_t - x_tj
  eval::DependenceSeries r2;
  std::vector<std::size_t> rows;   // data row of each r2 row
  std::vector<std::string> agent_names;
};

struct PeriodRows {
  std::size_t train_end = 0;
  std::size_t calibrate_end = 0;
  std::size_t test_end = 0;
  std::size_t calibrate_start() const { return train_end + 1; }
  std::size_t test_start() const { return calibrate_end + 1; }
};

struct PipelineResult {
  SeriesTable data;
  PeriodRows periods;
  std::vector<ForecastRecord> forecasts;  // ordered by (horizon, method, target)
  std::vector<eval::EvalSeries> metrics;  // LPDR vs BPS at the same horizon
  std::vector<PosteriorSummary> posteriors;
  std::string summary_json;
};

/// Resolves period labels against the data and checks their ordering.
PeriodRows resolve_periods(const PipelineConfig& cfg, const SeriesTable& data);

/// Full protocol on an in-memory table; nothing is written.
PipelineResult run_pipeline(const PipelineConfig& cfg, const SeriesTable& data);

/// Ingests cfg.data, runs, and writes every output file into cfg.out.
PipelineResult run_pipeline(const PipelineConfig& cfg);

/// forecasts.csv, metrics.csv, summary.json and posterior_*.csv.
std::vector<std::filesystem::path> write_outputs(const PipelineResult& result, const std::filesystem::path& dir);

struct LookAheadViolation {
  std::string method;
  int horizon = 0;
  std::string target_date;
  std::string reason;
};

/// Re-derives issue times from target dates and horizons and flags any
/// record that used data at or after its target minus the horizon.
std::vector<LookAheadViolation> audit_lookahead(const std::vector<ForecastRecord>& records, const SeriesTable& data);

/// Same audit over a written forecasts.csv.
std::vector<LookAheadViolation> audit_forecasts_csv(const std::filesystem::path& path, const SeriesTable& data);

}  // namespace bps
