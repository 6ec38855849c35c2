#include "app/commands.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "app/run_config.hpp"
#include "deeprank/backtest.hpp"
#include "deeprank/export.hpp"
#include "deeprank/factors.hpp"
#include "deeprank/gradient_check.hpp"
#include "deeprank/metrics.hpp"
#include "deeprank/rng.hpp"
#include "deeprank/synthetic.hpp"

namespace deeprank::app {

namespace fs = std::filesystem;

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::config: return kExitConfig;
    case ErrorCategory::data: return kExitData;
    case ErrorCategory::numeric: return kExitNumeric;
  }
  return kExitNumeric;
}

namespace {

RunConfig config_for(const CommandOptions& o) {
  RunConfig c = o.config ? load_run_config(*o.config) : RunConfig{};
  if (o.seed) c.apply_seed(*o.seed);
  if (o.out) c.output_dir = *o.out;
  return c;
}

MarketDataset load_data(const RunConfig& c) {
  if (c.synthetic) return generate_synthetic_market(*c.synthetic);
  return load_dataset(c.data->bars.string(), c.data->fundamentals.string(), c.data->benchmark.string());
}

void print_digest(std::ostream& out, const MarketDataset& d) {
  const auto& cal = d.calendar();
  const auto closes = d.benchmark_closes();
  out << fmt::format("stocks: {}\n", d.stock_count());
  out << fmt::format("bars: {}\n", d.bar_count());
  out << fmt::format("fundamentals: {}\n", d.fundamental_count());
  out << fmt::format("trading days: {}\n", cal.size());
  if (!cal.empty()) {
    out << fmt::format("span: {} .. {}\n", cal[0].to_string(), cal[cal.size() - 1].to_string());
    out << fmt::format("benchmark cumulative return: {:.6f}\n", closes.back() / closes.front() - 1.0);
  }
}

}  // namespace

void cmd_gen_data(const CommandOptions& options, std::ostream& out) {
  RunConfig c = config_for(options);
  if (!c.synthetic) {
    if (options.config) throw ConfigError("cli", "gen-data needs a 'synthetic' section in the config");
    c.synthetic = SyntheticMarketConfig{};
    c.synthetic->seed = c.seed + kSyntheticSeedOffset;
  }
  c.synthetic->validate();
  const SyntheticMarket market = generate_synthetic_market_detailed(*c.synthetic);
  write_dataset(c.output_dir, market.dataset);
  out << fmt::format("wrote {}\n", c.output_dir.string());
  out << fmt::format("regime: {} ({} .. {})\n", regime_name(c.synthetic->regime),
                     market.regime_window.first.to_string(), market.regime_window.last.to_string());
  print_digest(out, market.dataset);
  const auto& cal = market.dataset.calendar();
  const auto first = cal.index_at_or_before(market.regime_window.first - 1);
  const auto last = cal.index_of(market.regime_window.last);
  if (first && last) {
    const double b0 = market.dataset.benchmark_close(*first);
    const double b1 = market.dataset.benchmark_close(*last);
    out << fmt::format("benchmark regime return: {:.6f}\n", b1 / b0 - 1.0);
  }
}

void cmd_backtest(const CommandOptions& options, std::ostream& out) {
  if (!options.config) throw ConfigError("cli", "backtest needs --config");
  const RunConfig c = config_for(options);
  c.validate();
  const MarketDataset dataset = load_data(c);
  const ScenarioConfig scenario = c.scenario_config();
  FactorCache cache(dataset);
  for (const StrategyKind kind : c.strategies) {
    const BacktestResult result = run_scenario(dataset, kind, scenario, &cache);
    const ScenarioReport report = build_report(result, c.risk_free_annual);
    const fs::path dir = c.output_dir / std::string(strategy_name(kind));
    write_report(dir / "report.json", report);
    write_series(dir / "series.csv", result);
    write_trades(dir / "trades.csv", result);
    write_rankings(dir / "ranking.csv", result);
    out << fmt::format("{}: net_return={:.6f} benchmark_return={:.6f} sharpe={} similarity={:.6f} trades={}\n",
                       strategy_name(kind), report.net_return, report.benchmark_return,
                       std::isfinite(report.sharpe_ratio) ? fmt::format("{:.6f}", report.sharpe_ratio)
                                                          : std::string("undefined"),
                       report.similarity_to_benchmark, result.trades.size());
  }
}

bool cmd_gradcheck(const CommandOptions& options, std::ostream& out) {
  const std::uint64_t seed = options.seed ? *options.seed : (options.config ? config_for(options).seed : 0);
  constexpr std::size_t kBatch = 5;
  constexpr double kTolerance = 1e-5;
  Rng data(seed + kGradcheckDataSeedOffset);

  DenseMatrix flat(kBatch, kFactorCount);
  for (double& v : flat.values()) v = data.normal();
  SequenceBatch seq(kDefaultSequenceLength, DenseMatrix(kBatch, kFactorCount));
  for (auto& step : seq) {
    for (double& v : step.values()) v = data.normal();
  }
  std::vector<double> labels(kBatch);
  for (double& y : labels) y = data.normal(0.0, 0.1);

  GradientHook hook;
  if (options.inject_fault) {
    hook = [](std::span<double> g) { g[0] += 1.0; };
  }
  const auto mlp = gradient_check(MlpModel::create(kDefaultMlpDims, seed + kGradcheckMlpSeedOffset), flat, labels, hook);
  const auto lstm = gradient_check(
      LstmModel::create(kFactorCount, kDefaultLstmHidden, kDefaultSequenceLength, seed + kGradcheckLstmSeedOffset),
      seq, labels, hook);
  const bool ok = mlp.max_relative_error <= kTolerance && lstm.max_relative_error <= kTolerance;
  out << fmt::format("mlp  parameters={} max_relative_error={:.6e} worst_parameter={}\n", mlp.parameters_checked,
                     mlp.max_relative_error, mlp.worst_parameter);
  out << fmt::format("lstm parameters={} max_relative_error={:.6e} worst_parameter={}\n", lstm.parameters_checked,
                     lstm.max_relative_error, lstm.worst_parameter);
  out << (ok ? "gradient check passed\n" : "gradient check FAILED\n");
  return ok;
}

void cmd_report(const CommandOptions& options, std::ostream& out) {
  RunConfig c = options.config ? config_for(options) : RunConfig{};
  if (!options.config && !options.out) throw ConfigError("cli", "report needs --out or --config");
  if (options.out) c.output_dir = *options.out;
  if (!fs::is_directory(c.output_dir)) {
    throw IoError("cli", fmt::format("{} is not a directory", c.output_dir.string()));
  }
  std::vector<fs::path> dirs;
  if (fs::exists(c.output_dir / "series.csv")) dirs.push_back(c.output_dir);
  for (const auto& entry : fs::directory_iterator(c.output_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "series.csv")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw IoError("cli", fmt::format("no series.csv under {}", c.output_dir.string()));
  for (const auto& dir : dirs) {
    const SeriesFile s = read_series(dir / "series.csv");
    const std::string name = fs::absolute(dir).lexically_normal().filename().string();
    const ScenarioReport report = build_report(name, s.portfolio, s.benchmark, c.risk_free_annual);
    write_report(dir / "report.json", report);
    out << fmt::format("wrote {}\n", (dir / "report.json").string());
  }
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Factor-ranking strategies and monthly-rebalance backtests"};
  app.require_subcommand(1);
  CommandOptions options;
  std::string config, out_dir;
  std::uint64_t seed = 0;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "run configuration (JSON)");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "master seed override");
  };
  auto* gen = app.add_subcommand("gen-data", "write a synthetic market as CSV files");
  auto* backtest = app.add_subcommand("backtest", "run strategy backtests and write reports");
  auto* grad = app.add_subcommand("gradcheck", "compare analytic and numeric gradients");
  auto* report = app.add_subcommand("report", "re-render report.json from series.csv");
  for (auto* cmd : {gen, backtest, grad, report}) add_common(cmd);
  grad->add_flag("--inject-fault", options.inject_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  auto* active = app.get_subcommands().front();
  if (active->count("--config") > 0) options.config = config;
  if (active->count("--out") > 0) options.out = out_dir;
  if (active->count("--seed") > 0) options.seed = seed;

  try {
    if (active == gen) {
      cmd_gen_data(options, out);
    } else if (active == backtest) {
      cmd_backtest(options, out);
    } else if (active == grad) {
      return cmd_gradcheck(options, out) ? kExitOk : kExitNumeric;
    } else {
      cmd_report(options, out);
    }
  } catch (const Error& e) {
    err << fmt::format("error [{}]: {}\n", e.module(), e.what());
    return exit_code(e.category());
  } catch (const fs::filesystem_error& e) {
    err << fmt::format("error [cli]: {}\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    err << fmt::format("error: {}\n", e.what());
    return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace deeprank::app
