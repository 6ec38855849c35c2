#include "deeprank/metrics.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "deeprank/csv.hpp"
#include "deeprank/error.hpp"

namespace deeprank {

ReturnSeries::ReturnSeries(std::vector<Date> dates, std::vector<double> returns)
    : dates_(std::move(dates)), returns_(std::move(returns)) {
  if (dates_.size() != returns_.size()) {
    throw ArgumentError("metrics", fmt::format("{} dates for {} returns", dates_.size(), returns_.size()));
  }
  cumulative_.reserve(returns_.size());
  double growth = 1.0;
  for (double r : returns_) {
    if (!std::isfinite(r)) throw ArgumentError("metrics", "daily returns must be finite");
    growth *= 1.0 + r;
    cumulative_.push_back(growth - 1.0);
  }
}

namespace {

void check_pair(const ReturnSeries& a, const ReturnSeries& b) {
  if (a.size() != b.size()) {
    throw ArgumentError("metrics", fmt::format("series lengths differ: {} vs {}", a.size(), b.size()));
  }
  if (a.size() < 2) throw ArgumentError("metrics", "series need at least two observations");
}

double population_std(const std::vector<double>& x, std::size_t begin, std::size_t end) {
  const auto n = static_cast<double>(end - begin);
  double mean = 0.0;
  for (std::size_t i = begin; i < end; ++i) mean += x[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = begin; i < end; ++i) ss += (x[i] - mean) * (x[i] - mean);
  return std::sqrt(ss / n);
}

double signed_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  if (num == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return num > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

}  // namespace

double annualized_return(const ReturnSeries& series) {
  if (series.size() == 0) return 0.0;
  return std::pow(1.0 + series.total_return(), static_cast<double>(kTradingDaysPerYear) /
                                                    static_cast<double>(series.size())) - 1.0;
}

double sharpe_from_annualized(double annual_return, double risk_free_annual, double annual_volatility) {
  return signed_ratio(annual_return - risk_free_annual, annual_volatility);
}

double sharpe_ratio(const ReturnSeries& portfolio, const ReturnSeries& benchmark, double risk_free_annual) {
  check_pair(portfolio, benchmark);
  std::vector<double> excess(portfolio.size());
  for (std::size_t i = 0; i < excess.size(); ++i) excess[i] = portfolio.returns()[i] - benchmark.returns()[i];
  const double sigma = population_std(excess, 0, excess.size());
  return sharpe_from_annualized(annualized_return(portfolio), risk_free_annual,
                                sigma * std::sqrt(static_cast<double>(kTradingDaysPerYear)));
}

double similarity_to_benchmark(const ReturnSeries& portfolio, const ReturnSeries& benchmark, SimilarityBasis basis) {
  check_pair(portfolio, benchmark);
  const auto& p = basis == SimilarityBasis::cumulative ? portfolio.cumulative() : portfolio.returns();
  const auto& b = basis == SimilarityBasis::cumulative ? benchmark.cumulative() : benchmark.returns();
  std::vector<double> diff(p.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = p[i] - b[i];
  return population_std(diff, 0, diff.size());
}

std::vector<MonthlyRow> monthly_breakdown(const ReturnSeries& portfolio, const ReturnSeries& benchmark,
                                          double risk_free_annual) {
  if (portfolio.size() != benchmark.size()) {
    throw ArgumentError("metrics", "series lengths differ");
  }
  std::vector<MonthlyRow> rows;
  const auto& dates = portfolio.dates();
  std::vector<double> excess(portfolio.size());
  for (std::size_t i = 0; i < excess.size(); ++i) excess[i] = portfolio.returns()[i] - benchmark.returns()[i];
  std::size_t begin = 0;
  while (begin < dates.size()) {
    std::size_t end = begin;
    double gp = 1.0, gb = 1.0;
    while (end < dates.size() && dates[end].month_key() == dates[begin].month_key()) {
      gp *= 1.0 + portfolio.returns()[end];
      gb *= 1.0 + benchmark.returns()[end];
      ++end;
    }
    MonthlyRow row;
    row.month = dates[begin].month_string();
    row.portfolio_return = gp - 1.0;
    row.benchmark_return = gb - 1.0;
    const double rf = risk_free_annual * static_cast<double>(end - begin) / kTradingDaysPerYear;
    row.sharpe = signed_ratio(row.portfolio_return - rf, population_std(excess, begin, end));
    rows.push_back(row);
    begin = end;
  }
  return rows;
}

ReturnSeries portfolio_series(const BacktestResult& result) {
  return ReturnSeries(std::vector<Date>(result.dates.begin() + 1, result.dates.end()), result.portfolio_returns);
}

ReturnSeries benchmark_series(const BacktestResult& result) {
  return ReturnSeries(std::vector<Date>(result.dates.begin() + 1, result.dates.end()), result.benchmark_returns);
}

ScenarioReport build_report(const std::string& strategy, const ReturnSeries& portfolio,
                            const ReturnSeries& benchmark, double risk_free_annual) {
  ScenarioReport r;
  r.strategy = strategy;
  r.sharpe_ratio = sharpe_ratio(portfolio, benchmark, risk_free_annual);
  r.net_return = portfolio.total_return();
  r.benchmark_return = benchmark.total_return();
  r.similarity_to_benchmark = similarity_to_benchmark(portfolio, benchmark);
  r.risk_free_annual = risk_free_annual;
  r.monthly = monthly_breakdown(portfolio, benchmark, risk_free_annual);
  return r;
}

ScenarioReport build_report(const BacktestResult& result, double risk_free_annual) {
  return build_report(result.strategy, portfolio_series(result), benchmark_series(result), risk_free_annual);
}

namespace {

std::string json_number(double v) {
  return std::isfinite(v) ? csv::format_number(v) : std::string("\"undefined\"");
}

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          out += fmt::format("\\u{:04x}", static_cast<unsigned>(ch));
        } else {
          out += ch;
        }
    }
  }
  return out + "\"";
}

}  // namespace

std::string report_json(const ScenarioReport& r) {
  std::string out = "{\n";
  out += fmt::format("  \"strategy\": {},\n", json_string(r.strategy));
  out += fmt::format("  \"sharpe_ratio\": {},\n", json_number(r.sharpe_ratio));
  out += fmt::format("  \"net_return\": {},\n", json_number(r.net_return));
  out += fmt::format("  \"benchmark_return\": {},\n", json_number(r.benchmark_return));
  out += fmt::format("  \"similarity\": {},\n", json_number(r.similarity_to_benchmark));
  out += fmt::format("  \"risk_free_annual\": {},\n", json_number(r.risk_free_annual));
  out += "  \"monthly\": [";
  for (std::size_t i = 0; i < r.monthly.size(); ++i) {
    const auto& m = r.monthly[i];
    out += i == 0 ? "\n" : ",\n";
    out += fmt::format(
        "    {{\"month\": {}, \"portfolio_return\": {}, \"benchmark_return\": {}, \"sharpe\": {}}}",
        json_string(m.month), json_number(m.portfolio_return), json_number(m.benchmark_return),
        json_number(m.sharpe));
  }
  out += r.monthly.empty() ? "]\n" : "\n  ]\n";
  out += "}\n";
  return out;
}

}  // namespace deeprank
