#include "app/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "deeprank/error.hpp"
#include "json.hpp"

namespace deeprank::app {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("cli", msg); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(fmt::format("'{}' must be an object", where));
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items()) {
    if (!keys.contains(k)) fail(fmt::format("unknown key '{}' in {}", k, where));
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(fmt::format("'{}.{}' has the wrong type", where, key));
  }
}

Date get_date(const json& obj, const char* key, const std::string& where, Date fallback) {
  if (!obj.contains(key)) return fallback;
  const auto text = get<std::string>(obj, key, where, "");
  const auto d = Date::parse(text);
  if (!d) fail(fmt::format("'{}.{}' is not a YYYY-MM-DD date: '{}'", where, key, text));
  return *d;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

void RunConfig::apply_seed(std::uint64_t master) {
  seed = master;
  train.seed = master + kTrainingSeedOffset;
  if (synthetic && !synthetic_seed_explicit) synthetic->seed = master + kSyntheticSeedOffset;
}

void RunConfig::validate() const {
  if (!data && !synthetic) fail("config needs either 'data' paths or a 'synthetic' section");
  if (data && synthetic) fail("config may not have both 'data' and 'synthetic'");
  if (strategies.empty()) fail("strategy list is empty");
  if (scenario.last < scenario.first) fail("scenario end precedes its start");
  if (window < 1) fail("window must be >= 1");
  if (holdings < 1) fail("holdings must be >= 1");
  if (!(initial_capital > 0.0)) fail("initial_capital must be positive");
  if (!std::isfinite(risk_free_annual)) fail("risk_free_annual must be finite");
  train.validate();
  costs.validate();
  if (synthetic) synthetic->validate();
}

ScenarioConfig RunConfig::scenario_config() const {
  ScenarioConfig c;
  c.range = scenario;
  c.holdings = holdings;
  c.initial_capital = initial_capital;
  c.costs = costs;
  c.eligibility = eligibility;
  c.strategy.window = window;
  c.strategy.train = train;
  c.strategy.industry_dummies = industry_dummies;
  return c;
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(fmt::format("config is not valid JSON: {}", e.what()));
  }
  check_keys(root, "config",
             {"data", "synthetic", "scenario", "strategies", "window", "holdings", "train", "costs",
              "eligibility", "industry_dummies", "initial_capital", "risk_free_annual", "output_dir", "seed"});
  RunConfig c;
  c.seed = get<std::uint64_t>(root, "seed", "config", 0);

  if (root.contains("data")) {
    const auto& d = root["data"];
    check_keys(d, "data", {"bars", "fundamentals", "benchmark"});
    DataPaths p;
    for (const char* key : {"bars", "fundamentals", "benchmark"}) {
      if (!d.contains(key)) fail(fmt::format("'data.{}' is required", key));
    }
    p.bars = resolve(base_dir, get<std::string>(d, "bars", "data", ""));
    p.fundamentals = resolve(base_dir, get<std::string>(d, "fundamentals", "data", ""));
    p.benchmark = resolve(base_dir, get<std::string>(d, "benchmark", "data", ""));
    c.data = p;
  }
  if (root.contains("synthetic")) {
    const auto& s = root["synthetic"];
    check_keys(s, "synthetic", {"seed", "n_stocks", "start", "end", "regime", "regime_months",
                                "planted_signal_strength", "noise_level", "suspension_rate"});
    SyntheticMarketConfig m;
    c.synthetic_seed_explicit = s.contains("seed");
    m.seed = get<std::uint64_t>(s, "seed", "synthetic", 0);
    m.n_stocks = get<int>(s, "n_stocks", "synthetic", m.n_stocks);
    m.start = get_date(s, "start", "synthetic", m.start);
    m.end = get_date(s, "end", "synthetic", m.end);
    if (s.contains("regime")) {
      const auto name = get<std::string>(s, "regime", "synthetic", "");
      const auto r = parse_regime(name);
      if (!r) fail(fmt::format("unknown regime '{}'", name));
      m.regime = *r;
    }
    m.regime_months = get<int>(s, "regime_months", "synthetic", m.regime_months);
    m.planted_signal_strength = get<double>(s, "planted_signal_strength", "synthetic", m.planted_signal_strength);
    m.noise_level = get<double>(s, "noise_level", "synthetic", m.noise_level);
    m.suspension_rate = get<double>(s, "suspension_rate", "synthetic", m.suspension_rate);
    c.synthetic = m;
  }
  if (root.contains("scenario")) {
    const auto& s = root["scenario"];
    check_keys(s, "scenario", {"start", "end"});
    c.scenario.first = get_date(s, "start", "scenario", c.scenario.first);
    c.scenario.last = get_date(s, "end", "scenario", c.scenario.last);
  }
  if (root.contains("strategies")) {
    const auto& s = root["strategies"];
    if (!s.is_array()) fail("'strategies' must be a list");
    c.strategies.clear();
    for (const auto& item : s) {
      if (!item.is_string()) fail("'strategies' entries must be strings");
      const auto kind = parse_strategy(item.get<std::string>());
      for (auto k : c.strategies) {
        if (k == kind) fail(fmt::format("strategy '{}' listed twice", strategy_name(kind)));
      }
      c.strategies.push_back(kind);
    }
  }
  c.window = get<int>(root, "window", "config", c.window);
  c.holdings = get<int>(root, "holdings", "config", c.holdings);
  if (root.contains("train")) {
    const auto& t = root["train"];
    check_keys(t, "train", {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon"});
    c.train.epochs = get<int>(t, "epochs", "train", c.train.epochs);
    c.train.batch_size = get<int>(t, "batch_size", "train", c.train.batch_size);
    c.train.learning_rate = get<double>(t, "learning_rate", "train", c.train.learning_rate);
    c.train.beta1 = get<double>(t, "beta1", "train", c.train.beta1);
    c.train.beta2 = get<double>(t, "beta2", "train", c.train.beta2);
    c.train.epsilon = get<double>(t, "epsilon", "train", c.train.epsilon);
  }
  if (root.contains("costs")) {
    const auto& t = root["costs"];
    check_keys(t, "costs", {"commission_rate", "sell_tax_rate", "lot_size"});
    c.costs.commission_rate = get<double>(t, "commission_rate", "costs", 0.0);
    c.costs.sell_tax_rate = get<double>(t, "sell_tax_rate", "costs", 0.0);
    c.costs.lot_size = get<double>(t, "lot_size", "costs", 0.0);
  }
  if (root.contains("eligibility")) {
    const auto& t = root["eligibility"];
    check_keys(t, "eligibility", {"min_history_days", "require_not_suspended", "require_fundamentals",
                                  "exclude_limit_locked", "price_limit"});
    auto& e = c.eligibility;
    e.min_history_days = get<int>(t, "min_history_days", "eligibility", e.min_history_days);
    e.require_not_suspended = get<bool>(t, "require_not_suspended", "eligibility", e.require_not_suspended);
    e.require_fundamentals = get<bool>(t, "require_fundamentals", "eligibility", e.require_fundamentals);
    e.exclude_limit_locked = get<bool>(t, "exclude_limit_locked", "eligibility", e.exclude_limit_locked);
    e.price_limit = get<double>(t, "price_limit", "eligibility", e.price_limit);
  }
  c.industry_dummies = get<bool>(root, "industry_dummies", "config", c.industry_dummies);
  c.initial_capital = get<double>(root, "initial_capital", "config", c.initial_capital);
  c.risk_free_annual = get<double>(root, "risk_free_annual", "config", c.risk_free_annual);
  if (root.contains("output_dir")) {
    c.output_dir = resolve(base_dir, get<std::string>(root, "output_dir", "config", "out"));
  }
  const std::uint64_t explicit_synthetic_seed = c.synthetic ? c.synthetic->seed : 0;
  c.apply_seed(c.seed);
  if (c.synthetic && c.synthetic_seed_explicit) c.synthetic->seed = explicit_synthetic_seed;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cli", fmt::format("cannot read config {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

}  // namespace deeprank::app
