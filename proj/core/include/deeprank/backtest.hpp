#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "deeprank/date.hpp"
#include "deeprank/marketdata.hpp"
#include "deeprank/strategies.hpp"

namespace deeprank {

using PriceMap = std::map<StockId, double>;
using TargetWeights = std::map<StockId, double>;

struct CostModel {
  double commission_rate = 0.0;  // fraction of notional, both sides
  double sell_tax_rate = 0.0;    // fraction of sell notional
  double lot_size = 0.0;         // 0 = fractional shares

  /// Throws ConfigError on negative or non-finite values.
  void validate() const;
};

struct Portfolio {
  double cash = 0.0;
  std::map<StockId, double> holdings;  // shares > 0
  double last_valuation = 0.0;
};

enum class Side { buy, sell };
std::string_view side_name(Side side);

struct Trade {
  Date date;
  StockId stock_id;
  Side side = Side::buy;
  double shares = 0.0;
  double price = 0.0;
  double cost = 0.0;
};

struct RebalanceOutcome {
  Portfolio portfolio;
  std::vector<Trade> trades;
  double value_before = 0.0;
  double value_after = 0.0;
  double costs = 0.0;
};

/// Sells every holding outside `targets`, then trades each target to weight * post-sale valuation.
/// Stocks in `frozen` (suspended) are neither bought nor sold. Buys are scaled down together when
/// cash cannot cover them. Throws RebalanceError when a held or target stock has no price.
RebalanceOutcome rebalance(Portfolio portfolio, const TargetWeights& targets, const PriceMap& prices,
                           const CostModel& costs, Date date, const std::set<StockId>& frozen = {});

/// cash + sum of shares * price. Throws RebalanceError when a holding has no price.
double mark_to_market(const Portfolio& portfolio, const PriceMap& prices);

struct ScenarioConfig {
  DateRange range;
  int holdings = 10;
  double initial_capital = 1'000'000.0;
  CostModel costs;
  EligibilityRules eligibility;
  StrategyOptions strategy;

  /// Throws ConfigError.
  void validate() const;
};

struct RebalanceRecord {
  Date date;
  double value_before = 0.0;
  double value_after = 0.0;
  double costs = 0.0;
};

struct BacktestResult {
  std::string strategy;
  std::vector<Date> dates;
  /// Close-of-day valuation before that day's trades; values[0] is the initial capital.
  std::vector<double> values;
  std::vector<double> portfolio_returns;  // size dates - 1
  std::vector<double> benchmark_returns;  // size dates - 1
  std::vector<Trade> trades;
  std::vector<Ranking> rankings;
  std::vector<RebalanceRecord> rebalances;
};

/// Ranking for an action day given that day's eligible universe.
using RankingFn = std::function<Ranking(Date action_day, const std::vector<StockId>& universe)>;

/// Starts all in cash; on each action day in range ranks, selects the top holdings and
/// rebalances at that day's closes. An empty ranking means all cash until the next action day.
BacktestResult run_scenario(const MarketDataset& dataset, const RankingFn& ranker, const ScenarioConfig& config,
                            std::string name);
BacktestResult run_scenario(const MarketDataset& dataset, StrategyKind kind, const ScenarioConfig& config,
                            FactorCache* cache = nullptr);

}  // namespace deeprank
