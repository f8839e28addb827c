#include "bps/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "bps/error.hpp"

namespace bps::agents {

int AgentSpec::max_lag() const {
  int lag = 0;
  for (const auto& p : predictors) lag = std::max(lag, p.lag);
  return lag;
}

dlm::DlmPosterior AgentSpec::initial_prior() const {
  if (prior) return *prior;
  return dlm::make_prior(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(state_dim())), 1.0, 2.0, 0.01);
}

void AgentSpec::validate() const {
  if (target.empty()) throw ConfigError("agent '" + name + "' has no target series");
  if (state_dim() == 0) throw ConfigError("agent '" + name + "' needs a predictor or an intercept");
  for (const auto& p : predictors)
    if (p.lag < 1) throw ConfigError("agent '" + name + "': lags must be >= 1");
  discounts.validate();
  const auto p0 = initial_prior();
  p0.validate();
  if (p0.dim() != static_cast<Eigen::Index>(state_dim()))
    throw ConfigError("agent '" + name + "': prior dimension does not match its regressors");
}

std::vector<AgentSpec> standard_agents(const std::string& p, const std::string& r, const std::string& u) {
  auto lags = [](const std::vector<std::string>& series, int max_lag) {
    std::vector<Predictor> out;
    for (const auto& s : series)
      for (int l = 1; l <= max_lag; ++l) out.push_back({s, l});
    return out;
  };
  return {
      AgentSpec{"M1", p, lags({p}, 1)},
      AgentSpec{"M2", p, lags({p, r, u}, 3)},
      AgentSpec{"M3", p, lags({p}, 3)},
      AgentSpec{"M4", p, lags({p, r, u}, 1)},
  };
}

const dlm::DlmPosterior& AgentFit::posterior_after(std::size_t row) const {
  if (row + 1 == first_row) return initial;
  if (row < first_row || row > last_row()) {
    std::ostringstream msg;
    msg << "agent '" << spec.name << "' has no posterior after row " << row;
    throw DataError(msg.str());
  }
  return posteriors[row - first_row];
}

Eigen::VectorXd regressors(const AgentSpec& spec, const SeriesTable& data, std::size_t row) {
  Eigen::VectorXd F(static_cast<Eigen::Index>(spec.state_dim()));
  Eigen::Index i = 0;
  if (spec.intercept) F(i++) = 1.0;
  for (const auto& p : spec.predictors) {
    if (row < static_cast<std::size_t>(p.lag)) {
      std::ostringstream msg;
      msg << "agent '" << spec.name << "': lag " << p.lag << " of '" << p.series
          << "' unavailable for row " << row;
      throw DataError(msg.str());
    }
    const double x = data.at(p.series, row - static_cast<std::size_t>(p.lag));
    if (!std::isfinite(x))
      throw DataError("agent '" + spec.name + "': missing value of '" + p.series + "' at " +
                      data.date(row - static_cast<std::size_t>(p.lag)));
    F(i++) = x;
  }
  return F;
}

AgentFit build_agent(const AgentSpec& spec, const SeriesTable& data, std::optional<std::size_t> last_row) {
  spec.validate();
  AgentFit fit;
  fit.spec = spec;
  fit.initial = spec.initial_prior();
  fit.first_row = static_cast<std::size_t>(spec.max_lag());
  const std::size_t end = last_row.value_or(data.rows() - 1);
  if (end >= data.rows()) throw DataError("agent '" + spec.name + "': last row beyond data");
  if (fit.first_row > end)
    throw DataError("agent '" + spec.name + "': data too short for the required lags");

  const auto y = data.column(spec.target);
  fit.posteriors.resize(end - fit.first_row + 1);
  dlm::DlmPosterior prev = fit.initial;
  for (std::size_t row = fit.first_row; row <= end; ++row) {
    if (!std::isfinite(y[row]))
      throw DataError("agent '" + spec.name + "': missing value of '" + spec.target + "' at " + data.date(row));
    const Eigen::VectorXd F = regressors(spec, data, row);
    auto& out = fit.posteriors[row - fit.first_row];
    dlm::filter_update_into(prev, F, y[row], spec.discounts, out);
    prev = out;
  }
  return fit;
}

namespace {

// Student-T squared scale reproducing the sample spread: variance matching
// when dof > 2, interquartile matching otherwise.
double matched_scale(std::vector<double>& sims, double mean, double dof) {
  const double n = static_cast<double>(sims.size());
  double ss = 0.0;
  for (double x : sims) ss += (x - mean) * (x - mean);
  const double var = ss / (n - 1.0);
  if (dof > 2.0) return var * (dof - 2.0) / dof;

  std::sort(sims.begin(), sims.end());
  auto q = [&sims](double p) { return sims[static_cast<std::size_t>(p * static_cast<double>(sims.size() - 1))]; };
  const double iqr = q(0.75) - q(0.25);
  boost::math::students_t_distribution<double> t(dof);
  const double half = boost::math::quantile(t, 0.75);
  const double root = iqr / (2.0 * half);
  return root > 0.0 ? root * root : var;
}

}  // namespace

ForecastDensity agent_forecast(const AgentFit& fit, const SeriesTable& data, std::size_t issue_row,
                               int k, std::uint64_t seed, const ForecastOptions& opts) {
  if (k < 1) throw std::invalid_argument("agent_forecast: horizon must be >= 1");
  const AgentSpec& spec = fit.spec;
  const dlm::DlmPosterior& post = fit.posterior_after(issue_row);
  const dlm::Discounts& d = spec.discounts;

  if (k == 1) {
    const auto stats = dlm::one_step_predict(dlm::evolve_prior(post, d), regressors(spec, data, issue_row + 1));
    return ForecastDensity::student_t(stats.f, stats.q, stats.dof);
  }

  if (opts.paths < 2) throw std::invalid_argument("agent_forecast: need at least two simulated paths");
  Rng rng = make_rng(seed);
  const dlm::DlmPosterior prior = dlm::evolve_prior(post, d);
  const Eigen::MatrixXd prior_root = dlm::psd_root(prior.C);
  const Eigen::MatrixXd evo_root = dlm::evolution_factor(post, d);

  // Predictor cells that are observed at issue time are fixed; the target's
  // own future lags are fed back from the path; other future predictors are
  // held at their last observed value.
  struct Cell {
    double fixed = 0.0;
    int feedback_step = 0;  // 1-based simulated step, 0 when fixed
  };
  std::vector<std::vector<Cell>> cells(static_cast<std::size_t>(k));
  for (int h = 1; h <= k; ++h) {
    auto& row_cells = cells[static_cast<std::size_t>(h - 1)];
    if (spec.intercept) row_cells.push_back({1.0, 0});
    const std::size_t target_row = issue_row + static_cast<std::size_t>(h);
    for (const auto& p : spec.predictors) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(target_row) - p.lag;
      if (src <= static_cast<std::ptrdiff_t>(issue_row)) {
        row_cells.push_back({data.at(p.series, static_cast<std::size_t>(src)), 0});
      } else if (p.series == spec.target) {
        row_cells.push_back({0.0, static_cast<int>(src - static_cast<std::ptrdiff_t>(issue_row))});
      } else {
        row_cells.push_back({data.at(p.series, issue_row), 0});
      }
    }
  }

  std::vector<double> sims(static_cast<std::size_t>(opts.paths));
  std::vector<double> path(static_cast<std::size_t>(k));
  Eigen::VectorXd F(prior.dim());
  Eigen::VectorXd z(prior.dim());
  for (auto& out : sims) {
    // Step 1 is drawn from the exact time-(issue+1) prior; later steps
    // follow the discount evolutions.
    dlm::StateDraw draw;
    draw.v = 1.0 / draw_gamma(rng, 0.5 * prior.n, 0.5 * prior.n * prior.s);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = draw_normal(rng);
    draw.theta = prior.m + std::sqrt(draw.v / prior.s) * (prior_root * z);
    double n = prior.n;
    for (int h = 1; h <= k; ++h) {
      if (h > 1) {
        dlm::propagate(draw, evo_root, n, d, rng);
        n *= d.vol;
      }
      const auto& row_cells = cells[static_cast<std::size_t>(h - 1)];
      for (std::size_t i = 0; i < row_cells.size(); ++i) {
        const Cell& c = row_cells[i];
        F(static_cast<Eigen::Index>(i)) =
            c.feedback_step > 0 ? path[static_cast<std::size_t>(c.feedback_step - 1)] : c.fixed;
      }
      path[static_cast<std::size_t>(h - 1)] = F.dot(draw.theta) + std::sqrt(draw.v) * draw_normal(rng);
    }
    out = path.back();
  }

  const double mean = std::accumulate(sims.begin(), sims.end(), 0.0) / static_cast<double>(sims.size());
  const double dof = std::pow(d.vol, k) * post.n;
  const double scale = matched_scale(sims, mean, dof);
  return ForecastDensity::student_t(mean, scale, dof);
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t agent, std::size_t issue_row, int k) {
  Rng rng = make_rng(seed, {0xa6e47ULL, agent, issue_row, static_cast<std::uint64_t>(k)});
  return rng();
}

AgentPanel AgentPanel::slice(std::size_t first, std::size_t count) const {
  if (first + count > periods()) throw std::out_of_range("AgentPanel::slice beyond panel");
  AgentPanel out;
  out.horizon = horizon;
  out.agent_names = agent_names;
  const auto b = static_cast<std::ptrdiff_t>(first);
  const auto e = static_cast<std::ptrdiff_t>(first + count);
  out.targets.assign(targets.begin() + b, targets.begin() + e);
  out.densities.assign(densities.begin() + b, densities.begin() + e);
  out.outcomes.assign(outcomes.begin() + b, outcomes.begin() + e);
  return out;
}

void AgentPanel::validate() const {
  if (horizon < 1) throw ConfigError("panel horizon must be >= 1");
  if (targets.size() != densities.size() || targets.size() != outcomes.size())
    throw std::invalid_argument("AgentPanel: targets, densities and outcomes must align");
  for (const auto& row : densities) {
    if (row.size() != agent_names.size()) throw std::invalid_argument("AgentPanel: ragged density grid");
    for (const auto& cell : row) cell.validate();
  }
}

AgentPanel assemble_panel(const std::vector<AgentFit>& fits, const SeriesTable& data,
                          std::size_t first_target, std::size_t last_target, int k,
                          std::uint64_t seed, const ForecastOptions& opts) {
  if (k < 1) throw ConfigError("panel horizon must be >= 1");
  if (fits.empty()) throw ConfigError("panel needs at least one agent");
  if (first_target > last_target || last_target >= data.rows())
    throw DataError("panel window lies outside the data");

  AgentPanel panel;
  panel.horizon = k;
  for (const auto& f : fits) panel.agent_names.push_back(f.spec.name);
  const std::string& target = fits.front().spec.target;

  for (std::size_t row = first_target; row <= last_target; ++row) {
    if (row < static_cast<std::size_t>(k))
      throw DataError("panel window too early: no issue time for target " + data.date(row));
    const std::size_t issue = row - static_cast<std::size_t>(k);
    std::vector<ForecastDensity> cells;
    cells.reserve(fits.size());
    for (std::size_t j = 0; j < fits.size(); ++j) {
      if (!fits[j].can_issue_at(issue)) {
        std::ostringstream msg;
        msg << "panel window too early: agent '" << fits[j].spec.name << "' cannot issue at "
            << data.date(issue);
        throw DataError(msg.str());
      }
      cells.push_back(agent_forecast(fits[j], data, issue, k, cell_seed(seed, j, issue, k), opts));
    }
    panel.targets.push_back(row);
    panel.densities.push_back(std::move(cells));
    panel.outcomes.push_back(data.at(target, row));
  }
  return panel;
}

}  // namespace bps::agents
