#include "bps/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bps/error.hpp"
#include "bps/pools.hpp"
#include "bps/random.hpp"

namespace bps {

namespace {

using agents::AgentPanel;
using synthesis::BpsConfig;
using synthesis::Mode;

constexpr const char* kBps = "BPS";
constexpr const char* kBpsK = "BPS(k)";
constexpr const char* kBma = "BMA";
constexpr const char* kLinear = "LinearPool";
constexpr const char* kLog = "LogPool";

std::string fmt(double x) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

double sample_mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
  const double m = sample_mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Linear-interpolated quantile of an already sorted sample.
double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Band band_of(std::vector<double> xs, std::size_t row, std::string name) {
  std::sort(xs.begin(), xs.end());
  return {row, std::move(name), sample_mean(xs), sorted_quantile(xs, 0.025), sorted_quantile(xs, 0.975)};
}

// Rethrows with the (t, k, method) of the failing window prepended.
template <class F>
auto with_context(const std::string& ctx, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(ctx + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(ctx + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(ctx + ": " + e.what());
  } catch (const std::exception& e) {
    throw NumericalError(ctx + ": " + e.what());
  }
}

// Runs tasks on up to `workers` threads; the first failure by task index is rethrown.
void run_tasks(std::vector<std::function<void()>>& tasks, int workers) {
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(workers), tasks.size());
  if (n <= 1) {
    loop();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(loop);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Latents for a window one row longer than the previous chain's: previous
// rows are reused and the new row starts at the agents' locations.
synthesis::LatentStates extend_latents(const synthesis::LatentStates& prev, const AgentPanel& panel) {
  const auto T = static_cast<Eigen::Index>(panel.periods());
  const auto J = static_cast<Eigen::Index>(panel.agents());
  synthesis::LatentStates out{Eigen::MatrixXd(T, J), Eigen::MatrixXd::Ones(T, J)};
  const Eigen::Index keep = std::min(T, prev.x.rows());
  out.x.topRows(keep) = prev.x.topRows(keep);
  out.phi.topRows(keep) = prev.phi.topRows(keep);
  for (Eigen::Index t = keep; t < T; ++t)
    for (Eigen::Index j = 0; j < J; ++j)
      out.x(t, j) = panel.densities[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)].loc;
  return out;
}

// One expanding-window synthesis model: BPS (k = 1 panel, projected to every
// horizon) or BPS(k) (customized k-step panel).
struct Chain {
  int model_horizon = 1;  // 1 for BPS, k for BPS(k)
  Mode mode = Mode::direct;
  const AgentPanel* panel = nullptr;
  BpsConfig cfg;
  std::vector<std::size_t> issues;
};

struct WindowOutput {
  std::map<int, std::vector<double>> forecasts;  // horizon -> draws
  std::size_t info_through = 0;
  std::vector<Band> online;
};

}  // namespace

PeriodRows resolve_periods(const PipelineConfig& cfg, const SeriesTable& data) {
  PeriodRows p;
  p.train_end = data.row_of(cfg.train_end);
  p.calibrate_end = data.row_of(cfg.calibrate_end);
  p.test_end = cfg.test_end.empty() ? data.rows() - 1 : data.row_of(cfg.test_end);
  if (!(p.train_end < p.calibrate_end && p.calibrate_end < p.test_end))
    throw ConfigError("periods must satisfy train_end < calibrate_end < test_end");
  return p;
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const SeriesTable& data) {
  cfg.validate();
  if (!data.has(cfg.target)) throw DataError("target series '" + cfg.target + "' not in data");

  PipelineResult result;
  result.data = data;
  const PeriodRows periods = resolve_periods(cfg, data);
  result.periods = periods;

  std::vector<int> horizons = cfg.horizons;
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
  const int k_max = horizons.back();

  const std::size_t cal_start = periods.calibrate_start();
  const std::size_t test_start = periods.test_start();
  if (test_start < cal_start + static_cast<std::size_t>(k_max))
    throw ConfigError("calibration period must be at least as long as the largest horizon");

  // Agents are filtered causally, so one pass over everything up to test_end
  // serves every window.
  std::vector<agents::AgentSpec> specs = cfg.agents.empty() ? agents::standard_agents(cfg.target) : cfg.agents;
  for (auto& s : specs)
    if (s.target != cfg.target) throw ConfigError("agent '" + s.name + "' targets '" + s.target + "', not '" + cfg.target + "'");
  std::vector<agents::AgentFit> fits;
  for (const auto& s : specs)
    fits.push_back(with_context("agent " + s.name, [&] { return agents::build_agent(s, data, periods.test_end); }));
  const std::size_t J = fits.size();

  agents::ForecastOptions fopts;
  fopts.paths = cfg.agent_paths;
  std::map<int, AgentPanel> panels;
  for (int k : std::vector<int>{1}) panels[k] = {};
  for (int k : horizons) panels[k] = {};
  for (auto& [k, panel] : panels)
    panel = with_context("panel k=" + std::to_string(k), [&] {
      return agents::assemble_panel(fits, data, cal_start, periods.test_end, k, cfg.seed, fopts);
    });
  auto panel_row = [&](std::size_t target) { return target - cal_start; };

  const bool run_bps_k = cfg.methods.contains(Method::bps_k);

  // Synthesis chains and the issue rows each must cover.
  std::vector<Chain> chains;
  {
    Chain base;
    base.model_horizon = 1;
    base.mode = Mode::direct;
    base.panel = &panels.at(1);
    base.cfg = cfg.bps_for(1).resolve(J, 1, Mode::direct);
    base.cfg.mcmc.keep_paths = false;
    for (std::size_t i = test_start - static_cast<std::size_t>(k_max); i < periods.test_end; ++i) {
      const bool needed = std::any_of(horizons.begin(), horizons.end(), [&](int k) {
        const std::size_t tgt = i + static_cast<std::size_t>(k);
        return tgt >= test_start && tgt <= periods.test_end;
      });
      if (needed) base.issues.push_back(i);
    }
    chains.push_back(std::move(base));
  }
  if (run_bps_k)
    for (int k : horizons) {
      if (k == 1) continue;
      Chain c;
      c.model_horizon = k;
      c.mode = Mode::customized;
      c.panel = &panels.at(k);
      c.cfg = cfg.bps_for(k).resolve(J, k, Mode::customized);
      c.cfg.mcmc.keep_paths = false;
      for (std::size_t tgt = test_start; tgt <= periods.test_end; ++tgt) c.issues.push_back(tgt - static_cast<std::size_t>(k));
      chains.push_back(std::move(c));
    }

  std::vector<std::vector<WindowOutput>> outputs(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c) outputs[c].resize(chains[c].issues.size());

  auto run_window = [&](std::size_t c, std::size_t w, const synthesis::LatentStates* start,
                        synthesis::LatentStates* last) {
    const Chain& chain = chains[c];
    const std::size_t issue = chain.issues[w];
    const std::string label = chain.mode == Mode::direct ? kBps : kBpsK;
    const std::string ctx = "t=" + data.date(issue) + ", k=" + std::to_string(chain.model_horizon) + ", method=" + label;
    with_context(ctx, [&] {
      // Expanding window: every panel target observed by the issue time.
      const AgentPanel window = chain.panel->slice(0, panel_row(issue) + 1);
      Rng rng = make_rng(cfg.seed, {0xb95ULL, static_cast<std::uint64_t>(chain.model_horizon), issue});
      synthesis::LatentStates warm;
      if (start) warm = extend_latents(*start, window);
      synthesis::PosteriorDraws draws = synthesis::gibbs(window, chain.cfg, rng, start ? &warm : nullptr);
      if (last) *last = draws.last;

      WindowOutput& out = outputs[c][w];
      out.info_through = window.targets.back();
      for (int k : horizons) {
        if (chain.mode == Mode::customized && k != chain.model_horizon) continue;
        const std::size_t tgt = issue + static_cast<std::size_t>(k);
        if (tgt < test_start || tgt > periods.test_end) continue;
        const AgentPanel& kp = panels.at(k);
        const auto& next = kp.densities[panel_row(tgt)];
        out.info_through = std::max(out.info_through, kp.issue_row(panel_row(tgt)));
        Rng frng = make_rng(cfg.seed, {0xf0cULL, static_cast<std::uint64_t>(chain.model_horizon),
                                       issue, static_cast<std::uint64_t>(k)});
        out.forecasts[k] = synthesis::forecast_k_direct(draws, next, chain.mode == Mode::direct ? k : chain.model_horizon,
                                                        chain.cfg, frng);
      }
      const auto p = static_cast<Eigen::Index>(J + 1);
      for (Eigen::Index i = 0; i < p; ++i) {
        std::vector<double> xs;
        xs.reserve(draws.size());
        for (const auto& term : draws.terminal) xs.push_back(term.state.theta(i));
        out.online.push_back(band_of(std::move(xs), issue, i == 0 ? "intercept" : window.agent_names[static_cast<std::size_t>(i - 1)]));
      }
    });
  };

  std::vector<std::function<void()>> tasks;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    if (cfg.warm_start) {
      tasks.emplace_back([&, c] {
        synthesis::LatentStates prev;
        for (std::size_t w = 0; w < chains[c].issues.size(); ++w) {
          synthesis::LatentStates next;
          run_window(c, w, w == 0 ? nullptr : &prev, &next);
          prev = std::move(next);
        }
      });
    } else {
      for (std::size_t w = 0; w < chains[c].issues.size(); ++w)
        tasks.emplace_back([&, c, w] { run_window(c, w, nullptr, nullptr); });
    }
  }

  // Retrospective full-window fits for the posterior summaries.
  std::vector<PosteriorSummary> posteriors(chains.size());
  if (cfg.posterior_outputs) {
    for (std::size_t c = 0; c < chains.size(); ++c)
      tasks.emplace_back([&, c] {
        const Chain& chain = chains[c];
        with_context("retrospective k=" + std::to_string(chain.model_horizon), [&] {
          BpsConfig rcfg = chain.cfg;
          rcfg.mcmc.keep_paths = true;
          Rng rng = make_rng(cfg.seed, {0x7e7ULL, static_cast<std::uint64_t>(chain.model_horizon)});
          const AgentPanel& panel = *chain.panel;
          const synthesis::PosteriorDraws draws = synthesis::gibbs(panel, rcfg, rng);
          PosteriorSummary& ps = posteriors[c];
          ps.horizon = chain.model_horizon;
          ps.agent_names = panel.agent_names;
          ps.rows = panel.targets;
          const std::size_t T = panel.periods();
          std::vector<double> xs(draws.size());
          for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t i = 0; i <= J; ++i) {
              for (std::size_t s = 0; s < draws.size(); ++s)
                xs[s] = draws.trajectories[s].thetas(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i));
              ps.coefficients.push_back(band_of(xs, panel.targets[t], i == 0 ? "intercept" : panel.agent_names[i - 1]));
            }
            for (std::size_t j = 0; j < J; ++j) {
              for (std::size_t s = 0; s < draws.size(); ++s)
                xs[s] = panel.outcomes[t] - draws.latents[s].x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j));
              ps.latent_errors.push_back(band_of(xs, panel.targets[t], panel.agent_names[j]));
            }
          }
          std::vector<Eigen::MatrixXd> xdraws;
          xdraws.reserve(draws.size());
          for (const auto& l : draws.latents) xdraws.push_back(l.x);
          if (xdraws.size() >= 2) ps.r2 = eval::mc_empirical_r2(xdraws);
        });
      });
  }

  run_tasks(tasks, cfg.workers);

  // Assemble forecast records per horizon in a fixed method order.
  auto student_sd = [](const ForecastDensity& d) { return std::sqrt(d.variance()); };
  auto kde = [&](const std::vector<double>& draws, double y) {
    // Clamp underflow so log ratios stay finite.
    return std::max(kernel_density(draws, y, cfg.kde_bandwidth), std::numeric_limits<double>::min());
  };

  for (int k : horizons) {
    const AgentPanel& kp = panels.at(k);
    std::vector<ForecastRecord> recs;
    auto push = [&](std::string method, std::size_t tgt, std::size_t info, double mean, double sd, double dens) {
      recs.push_back({std::move(method), k, tgt - static_cast<std::size_t>(k), tgt, info, mean, sd, dens,
                      data.at(cfg.target, tgt)});
    };

    // BPS (direct projection for k > 1).
    {
      const Chain& chain = chains[0];
      for (std::size_t w = 0; w < chain.issues.size(); ++w) {
        const std::size_t tgt = chain.issues[w] + static_cast<std::size_t>(k);
        auto it = outputs[0][w].forecasts.find(k);
        if (it == outputs[0][w].forecasts.end()) continue;
        const double y = data.at(cfg.target, tgt);
        push(kBps, tgt, outputs[0][w].info_through, sample_mean(it->second), sample_sd(it->second), kde(it->second, y));
      }
    }
    if (run_bps_k && k > 1) {
      const auto c = static_cast<std::size_t>(std::find_if(chains.begin(), chains.end(),
                                                           [&](const Chain& ch) { return ch.model_horizon == k; }) -
                                              chains.begin());
      for (std::size_t w = 0; w < chains[c].issues.size(); ++w) {
        const std::size_t tgt = chains[c].issues[w] + static_cast<std::size_t>(k);
        const auto& f = outputs[c][w].forecasts.at(k);
        const double y = data.at(cfg.target, tgt);
        push(kBpsK, tgt, outputs[c][w].info_through, sample_mean(f), sample_sd(f), kde(f, y));
      }
    }
    if (cfg.methods.contains(Method::agents)) {
      for (std::size_t j = 0; j < J; ++j)
        for (std::size_t tgt = test_start; tgt <= periods.test_end; ++tgt) {
          const ForecastDensity& d = kp.densities[panel_row(tgt)][j];
          const double y = data.at(cfg.target, tgt);
          push(kp.agent_names[j], tgt, kp.issue_row(panel_row(tgt)), d.mean(), student_sd(d), d.pdf(y));
        }
    }
    if (cfg.methods.contains(Method::bma)) {
      // Model probabilities accrue from calibration start on horizon-k
      // densities of outcomes already observed at the issue time.
      pools::BmaState state = pools::BmaState::uniform(J);
      std::size_t folded = cal_start;  // next target to fold in
      std::vector<double> lik(J);
      for (std::size_t tgt = test_start; tgt <= periods.test_end; ++tgt) {
        const std::size_t issue = tgt - static_cast<std::size_t>(k);
        with_context("t=" + data.date(tgt) + ", k=" + std::to_string(k) + ", method=BMA", [&] {
          for (; folded <= issue; ++folded) {
            const auto& row = kp.densities[panel_row(folded)];
            for (std::size_t j = 0; j < J; ++j) lik[j] = row[j].pdf(kp.outcomes[panel_row(folded)]);
            state = pools::bma_update(state, lik);
          }
        });
        const auto& row = kp.densities[panel_row(tgt)];
        const pools::LinearPool mix = pools::bma_mixture(row, state);
        const double y = data.at(cfg.target, tgt);
        push(kBma, tgt, std::max(issue, folded - 1), mix.mean(), std::sqrt(mix.variance()), mix.pdf(y));
      }
    }
    if (cfg.methods.contains(Method::linear_pool)) {
      for (std::size_t tgt = test_start; tgt <= periods.test_end; ++tgt) {
        const pools::LinearPool mix = pools::linear_pool(kp.densities[panel_row(tgt)]);
        const double y = data.at(cfg.target, tgt);
        push(kLinear, tgt, kp.issue_row(panel_row(tgt)), mix.mean(), std::sqrt(mix.variance()), mix.pdf(y));
      }
    }
    if (cfg.methods.contains(Method::log_pool)) {
      for (std::size_t tgt = test_start; tgt <= periods.test_end; ++tgt) {
        const pools::LogPool pool = with_context("t=" + data.date(tgt) + ", k=" + std::to_string(k) + ", method=LogPool",
                                                 [&] { return pools::log_pool(kp.densities[panel_row(tgt)]); });
        const double y = data.at(cfg.target, tgt);
        push(kLog, tgt, kp.issue_row(panel_row(tgt)), pool.mean(), std::sqrt(pool.variance()),
             std::max(pool.pdf(y), std::numeric_limits<double>::min()));
      }
    }
    result.forecasts.insert(result.forecasts.end(), recs.begin(), recs.end());
  }

  // Metrics per (method, horizon); LPDR against BPS at the same horizon.
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (int k : horizons) {
    std::vector<std::string> methods;
    std::map<std::string, std::vector<const ForecastRecord*>> by_method;
    for (const auto& r : result.forecasts)
      if (r.horizon == k) {
        if (!by_method.contains(r.method)) methods.push_back(r.method);
        by_method[r.method].push_back(&r);
      }
    auto column = [](const std::vector<const ForecastRecord*>& rs, double ForecastRecord::*field) {
      std::vector<double> out;
      for (const auto* r : rs) out.push_back(r->*field);
      return out;
    };
    const auto base_density = column(by_method.at(kBps), &ForecastRecord::density);
    std::map<std::string, eval::EvalSeries> series;
    for (const auto& m : methods) {
      const auto& rs = by_method.at(m);
      series[m] = eval::evaluate(m, k, column(rs, &ForecastRecord::mean), column(rs, &ForecastRecord::sd),
                                 column(rs, &ForecastRecord::density), base_density, column(rs, &ForecastRecord::outcome));
      result.metrics.push_back(series[m]);
    }
    const double bps_msfe = series.at(kBps).msfe.back();
    const bool have_k = series.contains(kBpsK);
    std::vector<double> bpsk_lpdr;
    if (have_k) {
      const auto bpsk_density = column(by_method.at(kBpsK), &ForecastRecord::density);
      for (const auto& m : methods) {
        const auto l = eval::lpdr(column(by_method.at(m), &ForecastRecord::density), bpsk_density);
        bpsk_lpdr.push_back(l.back());
      }
    }
    for (std::size_t i = 0; i < methods.size(); ++i) {
      const auto& s = series.at(methods[i]);
      nlohmann::ordered_json row;
      row["method"] = methods[i];
      row["horizon"] = k;
      row["msfe"] = s.msfe.back();
      row["msfe_pct"] = eval::percent_improvement(bps_msfe, s.msfe.back());
      row["lpdr"] = s.lpdr.back();
      if (have_k) {
        row["msfe_pct_vs_bps_k"] = eval::percent_improvement(series.at(kBpsK).msfe.back(), s.msfe.back());
        row["lpdr_vs_bps_k"] = bpsk_lpdr[i];
      }
      table.push_back(row);
    }
  }

  for (std::size_t c = 0; c < chains.size(); ++c) {
    if (!cfg.posterior_outputs) posteriors[c].horizon = chains[c].model_horizon;
    for (const auto& w : outputs[c]) posteriors[c].online.insert(posteriors[c].online.end(), w.online.begin(), w.online.end());
  }
  result.posteriors = std::move(posteriors);

  nlohmann::ordered_json summary;
  summary["target"] = cfg.target;
  summary["periods"] = {{"train_end", data.date(periods.train_end)},
                        {"calibrate_end", data.date(periods.calibrate_end)},
                        {"test_end", data.date(periods.test_end)},
                        {"test_quarters", periods.test_end - periods.calibrate_end}};
  summary["horizons"] = horizons;
  summary["agents"] = panels.at(1).agent_names;
  summary["seed"] = cfg.seed;
  summary["mcmc_draws"] = chains[0].cfg.mcmc.draws;
  summary["mcmc_burn_in"] = chains[0].cfg.mcmc.burn_in;
  summary["table"] = table;
  result.summary_json = summary.dump(2) + "\n";
  return result;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  const SeriesTable data = ingest_csv(cfg.data, cfg.columns);
  PipelineResult result = run_pipeline(cfg, data);
  write_outputs(result, cfg.out);
  return result;
}

std::vector<std::filesystem::path> write_outputs(const PipelineResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::string& name) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    written.push_back(path);
    return out;
  };
  const SeriesTable& data = result.data;

  {
    auto out = open("forecasts.csv");
    out << "method,horizon,issue_date,target_date,mean,sd,density_at_outcome,outcome,info_through\n";
    for (const auto& r : result.forecasts)
      out << r.method << ',' << r.horizon << ',' << data.date(r.issue_row) << ',' << data.date(r.target_row) << ','
          << fmt(r.mean) << ',' << fmt(r.sd) << ',' << fmt(r.density) << ',' << fmt(r.outcome) << ','
          << data.date(r.info_through) << '\n';
  }
  {
    auto out = open("metrics.csv");
    out << "method,horizon,t,target_date,msfe,lpdr,fsd\n";
    for (const auto& s : result.metrics) {
      // Targets of this method's records, in order.
      std::vector<std::size_t> targets;
      for (const auto& r : result.forecasts)
        if (r.method == s.method && r.horizon == s.horizon) targets.push_back(r.target_row);
      for (std::size_t t = 0; t < s.msfe.size(); ++t)
        out << s.method << ',' << s.horizon << ',' << t + 1 << ',' << data.date(targets[t]) << ',' << fmt(s.msfe[t])
            << ',' << fmt(s.lpdr[t]) << ',' << fmt(s.fsd[t]) << '\n';
    }
  }
  {
    auto out = open("summary.json");
    out << result.summary_json;
  }
  for (const auto& ps : result.posteriors) {
    const std::string suffix = "_k" + std::to_string(ps.horizon) + ".csv";
    auto write_bands = [&](const std::string& name, const std::string& date_col, const std::string& name_col,
                           const std::vector<Band>& bands) {
      auto out = open(name + suffix);
      out << date_col << ',' << name_col << ",mean,lower,upper\n";
      for (const auto& b : bands)
        out << data.date(b.row) << ',' << b.name << ',' << fmt(b.mean) << ',' << fmt(b.lower) << ',' << fmt(b.upper) << '\n';
    };
    write_bands("posterior_online", "issue_date", "coefficient", ps.online);
    if (ps.coefficients.empty()) continue;
    write_bands("posterior_coefficients", "date", "coefficient", ps.coefficients);
    write_bands("posterior_latent_errors", "date", "agent", ps.latent_errors);
    auto out = open("posterior_r2" + suffix);
    out << "date,measure,value,singular\n";
    const auto pairs = eval::agent_pairs(static_cast<int>(ps.agent_names.size()));
    for (Eigen::Index t = 0; t < ps.r2.complete.rows(); ++t) {
      const std::string& date = data.date(ps.rows[static_cast<std::size_t>(t)]);
      for (Eigen::Index j = 0; j < ps.r2.complete.cols(); ++j)
        out << date << ",complete_" << ps.agent_names[static_cast<std::size_t>(j)] << ',' << fmt(ps.r2.complete(t, j))
            << ',' << (ps.r2.singular(t, j) ? 1 : 0) << '\n';
      for (std::size_t p = 0; p < pairs.size(); ++p)
        out << date << ",paired_" << ps.agent_names[static_cast<std::size_t>(pairs[p].first)] << '_'
            << ps.agent_names[static_cast<std::size_t>(pairs[p].second)] << ','
            << fmt(ps.r2.paired(t, static_cast<Eigen::Index>(p))) << ",0\n";
    }
  }
  return written;
}

std::vector<LookAheadViolation> audit_lookahead(const std::vector<ForecastRecord>& records, const SeriesTable& data) {
  std::vector<LookAheadViolation> out;
  for (const auto& r : records) {
    auto flag = [&](std::string reason) {
      out.push_back({r.method, r.horizon, r.target_row < data.rows() ? data.date(r.target_row) : "?", std::move(reason)});
    };
    if (r.horizon < 1 || r.target_row < static_cast<std::size_t>(r.horizon)) {
      flag("target precedes its horizon");
      continue;
    }
    const std::size_t issue = r.target_row - static_cast<std::size_t>(r.horizon);
    if (r.issue_row != issue) flag("issue date is not target minus horizon");
    if (r.info_through > issue) flag("uses data from " + data.date(r.info_through) + " after issue " + data.date(issue));
  }
  return out;
}

std::vector<LookAheadViolation> audit_forecasts_csv(const std::filesystem::path& path, const SeriesTable& data) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) header.push_back(cell);
  }
  auto col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("forecasts file lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_method = col("method"), c_h = col("horizon"), c_issue = col("issue_date"),
                    c_target = col("target_date"), c_info = col("info_through");
  std::vector<ForecastRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() < header.size()) throw DataError("short row in forecasts file: " + line);
    ForecastRecord r;
    r.method = cells[c_method];
    r.horizon = std::stoi(cells[c_h]);
    r.issue_row = data.row_of(cells[c_issue]);
    r.target_row = data.row_of(cells[c_target]);
    r.info_through = data.row_of(cells[c_info]);
    records.push_back(std::move(r));
  }
  return audit_lookahead(records, data);
}

}  // namespace bps
