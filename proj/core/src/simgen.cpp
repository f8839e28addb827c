#include "bps/simgen.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "bps/error.hpp"
#include "bps/random.hpp"

namespace bps::sim {

void SimConfig::validate() const {
  if (length < 1) throw ConfigError("simulation length must be at least 1");
  if (regimes.empty()) throw ConfigError("simulation needs at least one regime");
  if (!(switch_prob >= 0.0 && switch_prob <= 1.0)) throw ConfigError("switch probability must be in [0, 1]");
  if (!(noise >= 0.0)) throw ConfigError("noise SD must be non-negative");
  if (burn_in < 0) throw ConfigError("burn-in must be non-negative");
  if (regime_path) {
    if (static_cast<int>(regime_path->size()) != length)
      throw ConfigError("explicit regime path must have one entry per period");
    for (int r : *regime_path)
      if (r < 0 || r >= static_cast<int>(regimes.size())) throw ConfigError("regime path index out of range");
  }
  for (const auto& reg : regimes)
    for (const auto& term : reg.terms) {
      if (term.lag < 1) throw ConfigError("regime " + reg.name + ": lags must be >= 1");
      const bool known = term.series == target ||
                         std::any_of(exogenous.begin(), exogenous.end(),
                                     [&](const Exogenous& e) { return e.name == term.series; });
      if (!known) throw ConfigError("regime " + reg.name + ": unknown series " + term.series);
    }
  for (const auto& e : exogenous)
    if (e.name == target) throw ConfigError("exogenous series may not share the target name");
}

SimConfig default_config() {
  SimConfig cfg;
  cfg.exogenous = {{"r", 3.0, 0.9, 0.3}, {"u", 5.0, 0.9, 0.3}};
  cfg.regimes = {
      {"M1", 0.4, {{"p", 1, 0.8}}},
      {"M2",
       -0.2,
       {{"p", 1, 0.4}, {"p", 2, 0.2}, {"p", 3, 0.1}, {"r", 1, 0.6}, {"r", 2, -0.2},
        {"r", 3, 0.1}, {"u", 1, -0.2}, {"u", 2, 0.05}, {"u", 3, 0.05}}},
      {"M3", 0.3, {{"p", 1, 1.1}, {"p", 2, -0.5}, {"p", 3, 0.25}}},
      {"M4", 2.4, {{"p", 1, 0.3}, {"r", 1, 0.5}, {"u", 1, -0.5}}},
  };
  cfg.initial = 2.0;
  return cfg;
}

std::vector<std::string> quarterly_labels(const std::string& start, int count) {
  const DateKey key = parse_date_label(start);
  if (key.frequency != DateKey::Frequency::quarterly) throw ConfigError("start date must be a YYYYQn label");
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const long long q = key.ordinal + i;
    out.push_back(std::to_string(q / 4) + "Q" + std::to_string(q % 4 + 1));
  }
  return out;
}

SimResult generate(const SimConfig& cfg) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, {0x5139e});
  const int total = cfg.burn_in + cfg.length;
  const int n_regimes = static_cast<int>(cfg.regimes.size());

  int max_lag = 1;
  for (const auto& reg : cfg.regimes)
    for (const auto& term : reg.terms) max_lag = std::max(max_lag, term.lag);

  // Histories carry max_lag pre-sample values in front of period 0.
  std::map<std::string, std::vector<double>> hist;
  hist[cfg.target].assign(static_cast<std::size_t>(max_lag), cfg.initial);
  for (const auto& e : cfg.exogenous) hist[e.name].assign(static_cast<std::size_t>(max_lag), e.mean);

  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(cfg.length));
  int regime = 0;
  for (int t = 0; t < total; ++t) {
    const int emitted = t - cfg.burn_in;
    if (emitted >= 0) {
      if (cfg.regime_path) {
        regime = (*cfg.regime_path)[static_cast<std::size_t>(emitted)];
      } else if (emitted == 0) {
        regime = static_cast<int>(draw_uniform(rng) * n_regimes) % n_regimes;
      } else if (n_regimes > 1 && draw_uniform(rng) < cfg.switch_prob) {
        // Move to one of the other regimes uniformly.
        const int step = 1 + static_cast<int>(draw_uniform(rng) * (n_regimes - 1)) % (n_regimes - 1);
        regime = (regime + step) % n_regimes;
      }
      labels.push_back(regime);
    }

    const Regime& reg = cfg.regimes[static_cast<std::size_t>(regime)];
    double y = reg.intercept;
    for (const auto& term : reg.terms) {
      const auto& h = hist[term.series];
      y += term.coefficient * h[h.size() - static_cast<std::size_t>(term.lag)];
    }
    y += cfg.noise * draw_normal(rng);
    for (const auto& e : cfg.exogenous) {
      auto& h = hist[e.name];
      h.push_back(e.mean + e.ar * (h.back() - e.mean) + e.sd * draw_normal(rng));
    }
    hist[cfg.target].push_back(y);
  }

  const auto skip = static_cast<std::ptrdiff_t>(max_lag + cfg.burn_in);
  std::map<std::string, std::vector<double>> columns;
  for (auto& [name, h] : hist) columns[name].assign(h.begin() + skip, h.end());

  SimResult out{SeriesTable(quarterly_labels(cfg.start_date, cfg.length), std::move(columns)),
                std::move(labels), {}};
  for (const auto& reg : cfg.regimes) out.regime_names.push_back(reg.name);
  return out;
}

void write_simulation(const SimResult& result, const SimConfig& cfg, const std::filesystem::path& data_csv,
                      const std::filesystem::path& regime_csv) {
  std::vector<std::string> order{cfg.target};
  for (const auto& e : cfg.exogenous) order.push_back(e.name);
  result.data.write_csv(data_csv, "date", order);

  std::ofstream out(regime_csv);
  if (!out) throw DataError("cannot write " + regime_csv.string());
  out << "date,regime\n";
  for (std::size_t t = 0; t < result.regimes.size(); ++t)
    out << result.data.date(t) << ',' << result.regime_names[static_cast<std::size_t>(result.regimes[t])] << '\n';
}

std::vector<agents::AgentSpec> regime_agents(const SimConfig& cfg) {
  cfg.validate();
  std::vector<agents::AgentSpec> out;
  for (const auto& regime : cfg.regimes) {
    agents::AgentSpec spec;
    spec.name = regime.name;
    spec.target = cfg.target;
    spec.discounts = {1.0, 1.0};
    Eigen::VectorXd m(static_cast<Eigen::Index>(regime.terms.size() + 1));
    m(0) = regime.intercept;
    for (std::size_t i = 0; i < regime.terms.size(); ++i) {
      spec.predictors.push_back({regime.terms[i].series, regime.terms[i].lag});
      m(static_cast<Eigen::Index>(i + 1)) = regime.terms[i].coefficient;
    }
    const double noise_var = std::max(cfg.noise * cfg.noise, 1e-12);
    spec.prior = dlm::make_prior(m, 1e-12, 1e8, noise_var);
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace bps::sim
