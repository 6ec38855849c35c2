#include <benchmark/benchmark.h>

#include "deeprank/backtest.hpp"
#include "deeprank/factors.hpp"
#include "deeprank/synthetic.hpp"

namespace deeprank {
namespace {

const SyntheticMarket& market() {
  static const SyntheticMarket m = [] {
    SyntheticMarketConfig c;
    c.seed = 11;
    c.n_stocks = 300;
    return generate_synthetic_market_detailed(c);
  }();
  return m;
}

void BM_BuildPanel(benchmark::State& state) {
  const auto& ds = market().dataset;
  const Date date = market().month_ends[market().month_ends.size() - 3];
  for (auto _ : state) benchmark::DoNotOptimize(build_panel(ds, ds.stocks(), date));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.stock_count()));
}
BENCHMARK(BM_BuildPanel)->Unit(benchmark::kMillisecond);

void BM_NormalizePanel(benchmark::State& state) {
  const auto& ds = market().dataset;
  const auto raw = build_panel(ds, ds.stocks(), market().month_ends[market().month_ends.size() - 3]);
  for (auto _ : state) benchmark::DoNotOptimize(normalize_panel(raw));
}
BENCHMARK(BM_NormalizePanel);

void BM_GenerateMarket(benchmark::State& state) {
  SyntheticMarketConfig c;
  c.n_stocks = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_synthetic_market(c));
}
BENCHMARK(BM_GenerateMarket)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_Backtest(benchmark::State& state) {
  const auto& ds = market().dataset;
  ScenarioConfig c;
  c.range = market().regime_window;
  c.range.first = c.range.first - 1;
  const auto kind = static_cast<StrategyKind>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(ds, kind, c));
  state.SetLabel(std::string(strategy_name(kind)));
}
BENCHMARK(BM_Backtest)
    ->Arg(static_cast<int>(StrategyKind::linreg))
    ->Arg(static_cast<int>(StrategyKind::fcnn))
    ->Arg(static_cast<int>(StrategyKind::lstm))
    ->Unit(benchmark::kMillisecond)
    ->Iterations(1);

}  // namespace
}  // namespace deeprank
