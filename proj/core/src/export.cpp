#include "deeprank/export.hpp"

#include <fstream>

#include <fmt/format.h>

#include "deeprank/csv.hpp"
#include "deeprank/error.hpp"

namespace deeprank {

using csv::format_number;

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cli", fmt::format("cannot write {}", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("cli", fmt::format("failed writing {}", path.string()));
}

void write_dataset(const std::filesystem::path& dir, const MarketDataset& dataset) {
  std::string bars = "stock_id,date,close,prev_close,volume,turnover_ratio,market_cap,is_suspended\n";
  for (const auto& b : dataset.all_bars()) {
    bars += fmt::format("{},{},{},{},{},{},{},{}\n", b.stock_id, b.date.to_string(), format_number(b.close),
                        format_number(b.prev_close), format_number(b.volume), format_number(b.turnover_ratio),
                        format_number(b.market_cap), b.is_suspended ? 1 : 0);
  }
  write_text_file(dir / "bars.csv", bars);

  std::string funds =
      "stock_id,date,net_profit,non_recurring_gain_loss,net_assets,total_assets,avg_total_assets,"
      "long_term_debt,operating_revenue,operate_income,gross_profit,net_cash_flow,net_operate_cash_flow,"
      "net_profit_growth,cash,current_assets,current_liabilities,equity,industry_code\n";
  for (const auto& f : dataset.all_fundamentals()) {
    funds += fmt::format("{},{}", f.stock_id, f.date.to_string());
    for (double v : {f.net_profit, f.non_recurring_gain_loss, f.net_assets, f.total_assets, f.avg_total_assets,
                     f.long_term_debt, f.operating_revenue, f.operate_income, f.gross_profit, f.net_cash_flow,
                     f.net_operate_cash_flow, f.net_profit_growth, f.cash, f.current_assets,
                     f.current_liabilities, f.equity}) {
      funds += ',';
      funds += format_number(v);
    }
    funds += fmt::format(",{}\n", f.industry_code);
  }
  write_text_file(dir / "fundamentals.csv", funds);

  std::string bench = "date,close\n";
  for (const auto& p : dataset.benchmark_series()) {
    bench += fmt::format("{},{}\n", p.date.to_string(), format_number(p.price));
  }
  write_text_file(dir / "benchmark.csv", bench);
}

void write_series(const std::filesystem::path& path, const BacktestResult& result) {
  std::string out = "date,portfolio_value,portfolio_daily_return,benchmark_daily_return\n";
  for (std::size_t i = 0; i < result.dates.size(); ++i) {
    out += fmt::format("{},{}", result.dates[i].to_string(), format_number(result.values[i]));
    if (i == 0) {
      out += ",,\n";
    } else {
      out += fmt::format(",{},{}\n", format_number(result.portfolio_returns[i - 1]),
                         format_number(result.benchmark_returns[i - 1]));
    }
  }
  write_text_file(path, out);
}

void write_trades(const std::filesystem::path& path, const BacktestResult& result) {
  std::string out = "date,stock_id,side,shares,price,cost\n";
  for (const auto& t : result.trades) {
    out += fmt::format("{},{},{},{},{},{}\n", t.date.to_string(), t.stock_id, side_name(t.side),
                       format_number(t.shares), format_number(t.price), format_number(t.cost));
  }
  write_text_file(path, out);
}

void write_rankings(const std::filesystem::path& path, const BacktestResult& result) {
  std::string out = "date,rank,stock_id,score\n";
  for (const auto& r : result.rankings) {
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      out += fmt::format("{},{},{},{}\n", r.date.to_string(), i + 1, r.entries[i].stock_id,
                         format_number(r.entries[i].score));
    }
  }
  write_text_file(path, out);
}

void write_report(const std::filesystem::path& path, const ScenarioReport& report) {
  write_text_file(path, report_json(report));
}

SeriesFile read_series(const std::filesystem::path& path) {
  csv::Reader reader(path.string(),
                     {"date", "portfolio_value", "portfolio_daily_return", "benchmark_daily_return"});
  SeriesFile s;
  std::vector<double> pr, br;
  for (const auto& row : reader.rows()) {
    const bool first = s.dates.empty();
    s.dates.push_back(row.date(0));
    s.values.push_back(row.number(1));
    if (first) {
      if (!row.text(2).empty() || !row.text(3).empty()) row.fail(2, "first row carries no returns");
      continue;
    }
    pr.push_back(row.number(2));
    br.push_back(row.number(3));
  }
  if (s.dates.size() < 3) throw ValidationError(fmt::format("{} needs at least three rows", path.string()));
  const std::vector<Date> ret_dates(s.dates.begin() + 1, s.dates.end());
  s.portfolio = ReturnSeries(ret_dates, pr);
  s.benchmark = ReturnSeries(ret_dates, br);
  return s;
}

}  // namespace deeprank
