#pragma once

#include <string>
#include <vector>

#include "deeprank/backtest.hpp"
#include "deeprank/date.hpp"

namespace deeprank {

inline constexpr int kTradingDaysPerYear = 252;

/// Daily returns with their dates; cumulative c_t = prod(1 + r_i) - 1.
class ReturnSeries {
 public:
  ReturnSeries() = default;
  /// Throws ArgumentError when the lengths differ or a return is not finite.
  ReturnSeries(std::vector<Date> dates, std::vector<double> returns);

  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<double>& returns() const { return returns_; }
  const std::vector<double>& cumulative() const { return cumulative_; }
  std::size_t size() const { return returns_.size(); }
  /// Final cumulative return; 0 for an empty series.
  double total_return() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

 private:
  std::vector<Date> dates_;
  std::vector<double> returns_;
  std::vector<double> cumulative_;
};

/// (1 + total)^(252 / n) - 1
double annualized_return(const ReturnSeries& series);

/// (R_p - R_f) / (sigma_annual) where sigma_annual = daily population std * sqrt(252).
double sharpe_from_annualized(double annual_return, double risk_free_annual, double annual_volatility);

/// Annualized compound portfolio return minus the risk-free rate, over the annualized
/// population std of the daily excess over the benchmark. Signed infinity when that std is 0
/// (NaN when the numerator is 0 too). Throws ArgumentError unless both series have equal length >= 2.
double sharpe_ratio(const ReturnSeries& portfolio, const ReturnSeries& benchmark, double risk_free_annual);

enum class SimilarityBasis { cumulative, daily };

/// Population std of the portfolio-minus-benchmark series. Throws ArgumentError on unequal or short input.
double similarity_to_benchmark(const ReturnSeries& portfolio, const ReturnSeries& benchmark,
                               SimilarityBasis basis = SimilarityBasis::cumulative);

struct MonthlyRow {
  std::string month;  // YYYY-MM
  double portfolio_return = 0.0;
  double benchmark_return = 0.0;
  /// (R_m - R_f * days / 252) / daily excess std; not annualized.
  double sharpe = 0.0;
};

/// One row per calendar month present in the series, in order.
std::vector<MonthlyRow> monthly_breakdown(const ReturnSeries& portfolio, const ReturnSeries& benchmark,
                                          double risk_free_annual);

struct ScenarioReport {
  std::string strategy;
  double sharpe_ratio = 0.0;
  double net_return = 0.0;        // period total
  double benchmark_return = 0.0;  // period total
  double similarity_to_benchmark = 0.0;
  double risk_free_annual = 0.0;
  std::vector<MonthlyRow> monthly;
};

/// Series of a backtest, dated by the second through last trading days.
ReturnSeries portfolio_series(const BacktestResult& result);
ReturnSeries benchmark_series(const BacktestResult& result);

ScenarioReport build_report(const std::string& strategy, const ReturnSeries& portfolio,
                            const ReturnSeries& benchmark, double risk_free_annual);
ScenarioReport build_report(const BacktestResult& result, double risk_free_annual);

/// JSON document; non-finite numbers become the string "undefined".
std::string report_json(const ScenarioReport& report);

}  // namespace deeprank
