#include <fstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "deeprank/backtest.hpp"
#include "deeprank/error.hpp"
#include "deeprank/export.hpp"
#include "deeprank/metrics.hpp"
#include "test_support.hpp"

namespace deeprank {
namespace {

BacktestResult sample_result() {
  const auto ds = testing::random_market({.n_stocks = 4, .days = 400, .seed = 71});
  ScenarioConfig c;
  c.range = {Date::from_ymd(2015, 1, 1), Date::from_ymd(2015, 6, 30)};
  c.holdings = 2;
  c.costs = {.commission_rate = 0.0003, .sell_tax_rate = 0.001};
  RankingFn ranker = [](Date d, const std::vector<StockId>& u) {
    std::vector<RankedStock> e;
    for (std::size_t i = 0; i < u.size(); ++i) e.push_back({u[i], static_cast<double>((i * 7 + d.month()) % 5)});
    return make_ranking(d, std::move(e));
  };
  return run_scenario(ds, ranker, c, "fixed");
}

TEST(Export, DatasetRoundTripsThroughTheLoader) {
  testing::TempDir dir;
  const auto ds = testing::random_market({.n_stocks = 3, .days = 50, .seed = 72});
  write_dataset(dir.path(), ds);
  const auto back = load_dataset((dir.path() / "bars.csv").string(), (dir.path() / "fundamentals.csv").string(),
                                 (dir.path() / "benchmark.csv").string());
  ASSERT_EQ(back.bar_count(), ds.bar_count());
  for (std::size_t i = 0; i < ds.bar_count(); ++i) {
    const auto& a = ds.all_bars()[i];
    const auto& b = back.all_bars()[i];
    EXPECT_EQ(a.stock_id, b.stock_id);
    EXPECT_EQ(a.date, b.date);
    EXPECT_EQ(a.close, b.close);
    EXPECT_EQ(a.market_cap, b.market_cap);
    EXPECT_EQ(a.turnover_ratio, b.turnover_ratio);
  }
  EXPECT_EQ(back.fundamental_count(), ds.fundamental_count());
  EXPECT_EQ(back.all_fundamentals()[1].equity, ds.all_fundamentals()[1].equity);
  EXPECT_TRUE(std::equal(back.benchmark_closes().begin(), back.benchmark_closes().end(),
                         ds.benchmark_closes().begin(), ds.benchmark_closes().end()));
}

TEST(Export, SeriesRoundTripIsExact) {
  testing::TempDir dir;
  const auto r = sample_result();
  write_series(dir.path() / "out" / "series.csv", r);
  const auto s = read_series(dir.path() / "out" / "series.csv");
  EXPECT_EQ(s.dates, r.dates);
  EXPECT_EQ(s.values, r.values);
  EXPECT_EQ(s.portfolio.returns(), r.portfolio_returns);
  EXPECT_EQ(s.benchmark.returns(), r.benchmark_returns);
  const auto text = testing::read_file(dir.path() / "out" / "series.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "date,portfolio_value,portfolio_daily_return,benchmark_daily_return");
}

TEST(Export, TradesAndRankingsHaveOneRowEach) {
  testing::TempDir dir;
  const auto r = sample_result();
  write_trades(dir.path() / "trades.csv", r);
  write_rankings(dir.path() / "rankings.csv", r);
  const auto lines = [](const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); };
  const auto trades = testing::read_file(dir.path() / "trades.csv");
  EXPECT_EQ(lines(trades), r.trades.size() + 1);
  EXPECT_EQ(trades.rfind("date,stock_id,side,shares,price,cost\n", 0), 0u);
  std::size_t ranked = 0;
  for (const auto& rk : r.rankings) ranked += rk.entries.size();
  const auto rankings = testing::read_file(dir.path() / "rankings.csv");
  EXPECT_EQ(lines(rankings), ranked + 1);
  EXPECT_NE(rankings.find(fmt::format("{},1,{},", r.rankings[0].date.to_string(), r.rankings[0].entries[0].stock_id)),
            std::string::npos);
}

TEST(Export, ReportFileMatchesJson) {
  testing::TempDir dir;
  const auto report = build_report(sample_result(), 0.03);
  write_report(dir.path() / "report.json", report);
  EXPECT_EQ(testing::read_file(dir.path() / "report.json"), report_json(report));
}

TEST(Export, MalformedSeriesIsRejected) {
  testing::TempDir dir;
  const auto p = dir.path() / "series.csv";
  std::ofstream(p) << "date,portfolio_value,portfolio_daily_return,benchmark_daily_return\n"
                   << "2015-01-02,100,0.1,0\n2015-01-05,101,0.01,0\n2015-01-06,102,0.01,0\n";
  EXPECT_THROW(read_series(p), ParseError);
  std::ofstream(p, std::ios::trunc) << "date,portfolio_value,portfolio_daily_return,benchmark_daily_return\n"
                                    << "2015-01-02,100,,\n";
  EXPECT_THROW(read_series(p), ValidationError);
  EXPECT_THROW(read_series(dir.path() / "missing.csv"), IoError);
}

}  // namespace
}  // namespace deeprank
