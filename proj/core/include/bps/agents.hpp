#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bps/density.hpp"
#include "bps/dlm.hpp"
#include "bps/series.hpp"

namespace bps::agents {

struct Predictor {
  std::string series;
  int lag = 1;
};

/// A lag/factor DLM agent: y_t = (1, x_{t-lag}...)' theta_t + nu_t with
/// discount evolutions.
struct AgentSpec {
  std::string name;
  std::string target;
  std::vector<Predictor> predictors;
  bool intercept = true;
  dlm::Discounts discounts{0.99, 0.95};
  /// Prior at t = 0; when unset, m0 = 0, C0 = I, n0 = 2, s0 = 0.01.
  std::optional<dlm::DlmPosterior> prior;

  std::size_t state_dim() const { return predictors.size() + (intercept ? 1 : 0); }
  int max_lag() const;
  dlm::DlmPosterior initial_prior() const;
  void validate() const;
};

/// Default four-agent set over target `p` with auxiliary `r` and `u`:
///   M1: p_{t-1};  M2: p,r,u at lags 1..3;  M3: p at lags 1..3;  M4: p,r,u at lag 1.
std::vector<AgentSpec> standard_agents(const std::string& p = "p", const std::string& r = "r",
                                       const std::string& u = "u");

/// Filtered history of one agent over the data rows it can see.
struct AgentFit {
  AgentSpec spec;
  dlm::DlmPosterior initial;                 // t = 0 prior
  std::size_t first_row = 0;                 // first row with a posterior
  std::vector<dlm::DlmPosterior> posteriors;  // posteriors[i] is after row first_row + i

  std::size_t last_row() const { return first_row + posteriors.size() - 1; }
  /// Posterior after observing `row`; the t = 0 prior for row first_row - 1.
  const dlm::DlmPosterior& posterior_after(std::size_t row) const;
  bool can_issue_at(std::size_t row) const { return row + 1 >= first_row && row <= last_row(); }
};

/// Regressor vector for target `row` using observed data only.
Eigen::VectorXd regressors(const AgentSpec& spec, const SeriesTable& data, std::size_t row);

/// Forward filters the agent over rows [max_lag, last_row]. Throws DataError
/// on missing values in any required cell.
AgentFit build_agent(const AgentSpec& spec, const SeriesTable& data,
                     std::optional<std::size_t> last_row = std::nullopt);

struct ForecastOptions {
  int paths = 5000;  // simulated paths for k > 1
};

/// k-step-ahead density for row issue_row + k, issued after observing
/// `issue_row`. Reads data only up to `issue_row`. k = 1 is the analytic
/// Student-T predictive; k > 1 simulates the DLM forward and moment-matches a
/// Student-T with dof = vol^k n. `seed` feeds the k > 1 simulation only.
ForecastDensity agent_forecast(const AgentFit& fit, const SeriesTable& data, std::size_t issue_row,
                               int k, std::uint64_t seed, const ForecastOptions& opts = {});

/// T x J grid of k-step densities aligned to targets.
struct AgentPanel {
  int horizon = 1;
  std::vector<std::size_t> targets;  // data row of each panel row
  std::vector<std::string> agent_names;
  std::vector<std::vector<ForecastDensity>> densities;  // [t][j], issued at targets[t] - horizon
  std::vector<double> outcomes;                         // y at targets[t]

  std::size_t periods() const { return targets.size(); }
  std::size_t agents() const { return agent_names.size(); }
  std::size_t issue_row(std::size_t t) const { return targets[t] - static_cast<std::size_t>(horizon); }

  /// Rows [first, first + count) as a new panel.
  AgentPanel slice(std::size_t first, std::size_t count) const;
  void validate() const;
};

/// Cell (t, j) = agent j's horizon-k density for target row t, issued at t - k.
/// Targets run over [first_target, last_target]. Cells for k > 1 use the
/// stream (seed, j, issue row, k), so any cell can be recomputed alone.
AgentPanel assemble_panel(const std::vector<AgentFit>& fits, const SeriesTable& data,
                          std::size_t first_target, std::size_t last_target, int k,
                          std::uint64_t seed, const ForecastOptions& opts = {});

/// Stream seed used for a k-step cell; exposed so callers can recompute cells.
std::uint64_t cell_seed(std::uint64_t seed, std::size_t agent, std::size_t issue_row, int k);

}  // namespace bps::agents
