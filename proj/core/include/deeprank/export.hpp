#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "deeprank/backtest.hpp"
#include "deeprank/marketdata.hpp"
#include "deeprank/metrics.hpp"

namespace deeprank {

/// bars.csv, fundamentals.csv and benchmark.csv in the loader's schemas.
void write_dataset(const std::filesystem::path& dir, const MarketDataset& dataset);

/// date,portfolio_value,portfolio_daily_return,benchmark_daily_return; the first row has no returns.
void write_series(const std::filesystem::path& path, const BacktestResult& result);
/// date,stock_id,side,shares,price,cost
void write_trades(const std::filesystem::path& path, const BacktestResult& result);
/// date,rank,stock_id,score (rank is 1-based)
void write_rankings(const std::filesystem::path& path, const BacktestResult& result);
void write_report(const std::filesystem::path& path, const ScenarioReport& report);

struct SeriesFile {
  std::vector<Date> dates;
  std::vector<double> values;
  ReturnSeries portfolio;  // dated by rows 2..n
  ReturnSeries benchmark;
};
/// Reads a series.csv written by write_series. Throws ParseError / IoError.
SeriesFile read_series(const std::filesystem::path& path);

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace deeprank
