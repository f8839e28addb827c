#include "bps/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bps/error.hpp"

namespace bps {

namespace pt = boost::property_tree;

BpsSpec BpsSpec::defaults(int k) {
  BpsSpec spec;
  if (k > 1) {
    spec.c0 = 1e-4;
    spec.discounts = {0.99, 0.99};
  }
  return spec;
}

synthesis::BpsConfig BpsSpec::resolve(std::size_t agents, int horizon, synthesis::Mode mode) const {
  synthesis::BpsConfig cfg;
  const auto p = static_cast<Eigen::Index>(agents + 1);
  Eigen::VectorXd m = Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(agents));
  m(0) = 0.0;
  if (m0) {
    if (static_cast<Eigen::Index>(m0->size()) != p)
      throw ConfigError("bps m0 needs " + std::to_string(p) + " entries (intercept plus one per agent)");
    m = Eigen::Map<const Eigen::VectorXd>(m0->data(), p);
  }
  cfg.prior = dlm::make_prior(m, c0, n0, s0);
  cfg.discounts = discounts;
  cfg.horizon = horizon;
  cfg.mode = mode;
  cfg.mcmc = mcmc;
  cfg.validate(agents);
  return cfg;
}

Method parse_method(const std::string& token) {
  const std::string t = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(token));
  if (t == "bps_k" || t == "bpsk") return Method::bps_k;
  if (t == "agents") return Method::agents;
  if (t == "bma") return Method::bma;
  if (t == "linear" || t == "linear_pool" || t == "lp") return Method::linear_pool;
  if (t == "log" || t == "log_pool") return Method::log_pool;
  throw ConfigError("unknown method '" + token + "'");
}

std::string method_token(Method m) {
  switch (m) {
    case Method::bps_k: return "bps_k";
    case Method::agents: return "agents";
    case Method::bma: return "bma";
    case Method::linear_pool: return "linear";
    case Method::log_pool: return "log";
  }
  return {};
}

std::set<Method> all_methods() {
  return {Method::bps_k, Method::agents, Method::bma, Method::linear_pool, Method::log_pool};
}

BpsSpec PipelineConfig::bps_for(int k) const {
  auto it = bps.find(k);
  return it == bps.end() ? BpsSpec::defaults(k) : it->second;
}

void PipelineConfig::set_mcmc_draws(int draws) {
  for (int k : horizons)
    if (!bps.contains(k)) bps[k] = BpsSpec::defaults(k);
  if (!bps.contains(1)) bps[1] = BpsSpec::defaults(1);
  for (auto& [k, spec] : bps) spec.mcmc.draws = draws;
}

void PipelineConfig::validate() const {
  if (data.empty()) throw ConfigError("no data file given");
  if (target.empty()) throw ConfigError("no target series given");
  if (train_end.empty() || calibrate_end.empty()) throw ConfigError("train_end and calibrate_end are required");
  if (horizons.empty()) throw ConfigError("at least one horizon is required");
  for (int k : horizons)
    if (k < 1) throw ConfigError("horizons must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (agent_paths < 2) throw ConfigError("agent_paths must be >= 2");
  if (kde_bandwidth && !(*kde_bandwidth > 0.0)) throw ConfigError("kde_bandwidth must be positive");
  for (const auto& a : agents) {
    try {
      a.validate();
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
  for (const auto& [k, spec] : bps) {
    if (k < 1) throw ConfigError("bps sections must name a horizon >= 1");
    try {
      spec.discounts.validate();
    } catch (const std::exception& e) {
      throw ConfigError("bps " + std::to_string(k) + ": " + e.what());
    }
    if (!(spec.n0 > 0.0) || !(spec.s0 > 0.0) || !(spec.c0 > 0.0))
      throw ConfigError("bps " + std::to_string(k) + ": n0, s0 and c0 must be positive");
    if (spec.mcmc.draws < 1 || spec.mcmc.burn_in < 0 || spec.mcmc.thin < 1)
      throw ConfigError("bps " + std::to_string(k) + ": invalid MCMC settings");
  }
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::algorithm::is_any_of(", "), boost::algorithm::token_compress_on);
  std::vector<int> out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(p, &used));
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::exception&) {
      throw ConfigError("expected an integer, got '" + p + "'");
    }
  }
  return out;
}

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::algorithm::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::algorithm::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& p : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(p, &used));
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::exception&) {
      throw ConfigError("expected a number, got '" + p + "'");
    }
  }
  return out;
}

template <class T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  auto node = tree.get_child_optional(pt::ptree::path_type(key, '\0'));
  if (!node) return fallback;
  auto value = node->get_value_optional<T>();
  if (!value) throw ConfigError("bad value for '" + key + "': '" + node->data() + "'");
  return *value;
}

bool get_bool(const pt::ptree& tree, const std::string& key, bool fallback) {
  auto node = tree.get_child_optional(pt::ptree::path_type(key, '\0'));
  if (!node) return fallback;
  const std::string v = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(node->data()));
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean for '" + key + "': '" + node->data() + "'");
}

synthesis::McmcSettings read_mcmc(const pt::ptree& tree, synthesis::McmcSettings base) {
  base.burn_in = get<int>(tree, "burn_in", base.burn_in);
  base.draws = get<int>(tree, "draws", base.draws);
  base.thin = get<int>(tree, "thin", base.thin);
  return base;
}

agents::AgentSpec read_agent(const std::string& name, const pt::ptree& tree, const std::string& target) {
  agents::AgentSpec spec;
  spec.name = name;
  spec.target = get<std::string>(tree, "target", target);
  spec.intercept = get_bool(tree, "intercept", true);
  for (const auto& item : split_list(get<std::string>(tree, "predictors", ""))) {
    // "series:lag" or "series:1-3"
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("agent " + name + ": predictor '" + item + "' needs series:lag");
    const std::string series = boost::algorithm::trim_copy(item.substr(0, colon));
    const std::string lags = boost::algorithm::trim_copy(item.substr(colon + 1));
    int lo = 0;
    int hi = 0;
    try {
      const auto dash = lags.find('-');
      lo = std::stoi(lags.substr(0, dash));
      hi = dash == std::string::npos ? lo : std::stoi(lags.substr(dash + 1));
    } catch (const std::exception&) {
      throw ConfigError("agent " + name + ": bad lag in '" + item + "'");
    }
    if (lo < 1 || hi < lo) throw ConfigError("agent " + name + ": bad lag range in '" + item + "'");
    for (int l = lo; l <= hi; ++l) spec.predictors.push_back({series, l});
  }
  spec.discounts.state = get<double>(tree, "state_discount", spec.discounts.state);
  spec.discounts.vol = get<double>(tree, "vol_discount", spec.discounts.vol);

  const bool custom_prior = tree.count("n0") || tree.count("s0") || tree.count("c0") || tree.count("m0");
  if (custom_prior) {
    const auto p = static_cast<Eigen::Index>(spec.state_dim());
    dlm::DlmPosterior prior = spec.initial_prior();
    if (tree.count("m0")) {
      const auto m0 = parse_double_list(get<std::string>(tree, "m0", ""));
      if (static_cast<Eigen::Index>(m0.size()) != p)
        throw ConfigError("agent " + name + ": m0 needs " + std::to_string(p) + " entries");
      prior.m = Eigen::Map<const Eigen::VectorXd>(m0.data(), p);
    }
    prior.C = get<double>(tree, "c0", 1.0) * Eigen::MatrixXd::Identity(p, p);
    prior.n = get<double>(tree, "n0", prior.n);
    prior.s = get<double>(tree, "s0", prior.s);
    spec.prior = prior;
  }
  return spec;
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  PipelineConfig cfg;
  auto resolve_path = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  static const std::set<std::string> known_top{
      "data", "out", "seed", "target", "date_column", "series", "train_end", "calibrate_end", "test_end",
      "horizons", "methods", "workers", "warm_start", "agent_paths", "kde_bandwidth", "posterior_outputs"};

  synthesis::McmcSettings mcmc_defaults;
  if (auto m = tree.get_child_optional("mcmc")) mcmc_defaults = read_mcmc(*m, mcmc_defaults);

  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      if (!known_top.contains(key)) throw ConfigError("unknown config key '" + key + "'");
      continue;
    }
    if (key == "mcmc") continue;
    std::vector<std::string> words;
    boost::algorithm::split(words, key, boost::algorithm::is_space(), boost::algorithm::token_compress_on);
    if (words.size() == 2 && words[0] == "agent") continue;
    if (words.size() == 2 && words[0] == "bps") continue;
    throw ConfigError("unknown config section '" + key + "'");
  }

  if (tree.count("data")) cfg.data = resolve_path(tree.get<std::string>("data"));
  if (tree.count("out")) cfg.out = resolve_path(tree.get<std::string>("out"));
  cfg.seed = get<std::uint64_t>(tree, "seed", cfg.seed);
  cfg.target = get<std::string>(tree, "target", cfg.target);
  cfg.columns.date_column = get<std::string>(tree, "date_column", cfg.columns.date_column);
  cfg.columns.series = split_list(get<std::string>(tree, "series", ""));
  cfg.train_end = get<std::string>(tree, "train_end", "");
  cfg.calibrate_end = get<std::string>(tree, "calibrate_end", "");
  cfg.test_end = get<std::string>(tree, "test_end", "");
  if (tree.count("horizons")) cfg.horizons = parse_int_list(tree.get<std::string>("horizons"));
  if (tree.count("methods")) {
    cfg.methods.clear();
    for (const auto& m : split_list(tree.get<std::string>("methods"))) {
      if (boost::algorithm::to_lower_copy(m) == "bps") continue;
      cfg.methods.insert(parse_method(m));
    }
  }
  cfg.workers = get<int>(tree, "workers", cfg.workers);
  cfg.warm_start = get_bool(tree, "warm_start", cfg.warm_start);
  cfg.agent_paths = get<int>(tree, "agent_paths", cfg.agent_paths);
  if (tree.count("kde_bandwidth")) cfg.kde_bandwidth = get<double>(tree, "kde_bandwidth", 0.0);
  cfg.posterior_outputs = get_bool(tree, "posterior_outputs", cfg.posterior_outputs);

  // Sections keep file order so agent columns follow the document.
  for (const auto& [key, node] : tree) {
    std::vector<std::string> words;
    boost::algorithm::split(words, key, boost::algorithm::is_space(), boost::algorithm::token_compress_on);
    if (words.size() != 2) continue;
    if (words[0] == "agent") {
      cfg.agents.push_back(read_agent(words[1], node, cfg.target));
    } else if (words[0] == "bps") {
      const auto ks = parse_int_list(words[1]);
      if (ks.size() != 1) throw ConfigError("bad bps section '" + key + "'");
      BpsSpec spec = BpsSpec::defaults(ks[0]);
      spec.mcmc = mcmc_defaults;
      spec.discounts.state = get<double>(node, "state_discount", spec.discounts.state);
      spec.discounts.vol = get<double>(node, "vol_discount", spec.discounts.vol);
      spec.n0 = get<double>(node, "n0", spec.n0);
      spec.s0 = get<double>(node, "s0", spec.s0);
      spec.c0 = get<double>(node, "c0", spec.c0);
      if (node.count("m0")) spec.m0 = parse_double_list(node.get<std::string>("m0"));
      spec.mcmc = read_mcmc(node, spec.mcmc);
      cfg.bps[ks[0]] = spec;
    }
  }
  // Horizons without their own section still pick up [mcmc].
  std::vector<int> ks = cfg.horizons;
  ks.push_back(1);
  for (int k : ks)
    if (!cfg.bps.contains(k)) {
      BpsSpec spec = BpsSpec::defaults(k);
      spec.mcmc = mcmc_defaults;
      cfg.bps[k] = spec;
    }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

}  // namespace bps
