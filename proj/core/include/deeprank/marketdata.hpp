#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "deeprank/date.hpp"

namespace deeprank {

using StockId = std::string;

struct TradeBar {
  StockId stock_id;
  Date date;
  double close = 0.0;
  double prev_close = 0.0;
  double volume = 0.0;
  double turnover_ratio = 0.0;
  double market_cap = 0.0;
  bool is_suspended = false;
};

/// Periodic accounting fields; looked up with as-of semantics.
struct FundamentalSnapshot {
  StockId stock_id;
  Date date;
  double net_profit = 0.0;
  double non_recurring_gain_loss = 0.0;
  double net_assets = 0.0;
  double total_assets = 0.0;
  double avg_total_assets = 0.0;
  double long_term_debt = 0.0;
  double operating_revenue = 0.0;
  double operate_income = 0.0;
  double gross_profit = 0.0;
  double net_cash_flow = 0.0;
  double net_operate_cash_flow = 0.0;
  double net_profit_growth = 0.0;
  double cash = 0.0;
  double current_assets = 0.0;
  double current_liabilities = 0.0;
  double equity = 0.0;
  int industry_code = 0;
};

struct PricePoint {
  Date date;
  double price = 0.0;
};

/// Strictly increasing trading dates.
class TradingCalendar {
 public:
  TradingCalendar() = default;
  explicit TradingCalendar(std::vector<Date> dates);

  const std::vector<Date>& dates() const { return dates_; }
  std::size_t size() const { return dates_.size(); }
  bool empty() const { return dates_.empty(); }
  Date operator[](std::size_t i) const { return dates_[i]; }

  std::optional<std::size_t> index_of(Date d) const;
  /// Index of the latest trading date <= d.
  std::optional<std::size_t> index_at_or_before(Date d) const;
  bool contains(Date d) const { return index_of(d).has_value(); }

  /// Calendar index of the last trading date of every month covered, ascending.
  const std::vector<std::size_t>& month_end_indices() const { return month_ends_; }
  bool is_month_end(std::size_t index) const;

 private:
  std::vector<Date> dates_;
  std::vector<std::size_t> month_ends_;
};

/// The last trading date of every month whose last trading date lies in `range`.
std::vector<Date> action_days(const TradingCalendar& calendar, DateRange range);

/// p(t1) / p(t0) - 1 on a date-sorted price sequence. Throws LookupError on a missing date.
double period_return(std::span<const PricePoint> series, Date t0, Date t1);

struct LoadOptions {
  /// Reject bars whose close moves more than `price_limit` from prev_close.
  bool enforce_price_limit = false;
  double price_limit = 0.10;
};

/// Immutable, validated market data. Safe for concurrent reads.
class MarketDataset {
 public:
  MarketDataset() = default;

  /// Validates every invariant and indexes the rows; throws ValidationError.
  static MarketDataset build(std::vector<TradeBar> bars,
                             std::vector<FundamentalSnapshot> fundamentals,
                             std::vector<PricePoint> benchmark, const LoadOptions& options = {});

  const TradingCalendar& calendar() const { return calendar_; }
  /// Ascending stock ids.
  const std::vector<StockId>& stocks() const { return stocks_; }
  std::size_t stock_count() const { return stocks_.size(); }
  std::optional<std::size_t> stock_index(std::string_view id) const;

  /// Bar of `stock` on calendar day `day`, or nullptr.
  const TradeBar* bar(std::size_t stock, std::size_t day) const;
  const TradeBar* bar(std::string_view stock, Date date) const;
  std::span<const TradeBar> bars_of(std::size_t stock) const;
  /// Calendar index of the stock's first bar (listing), if any.
  std::optional<std::size_t> first_bar_day(std::size_t stock) const;
  /// Close of the latest bar at or before `day`.
  std::optional<double> last_close(std::size_t stock, std::size_t day) const;

  /// Latest snapshot dated <= date, or nullptr.
  const FundamentalSnapshot* fundamentals_as_of(std::size_t stock, Date date) const;
  std::span<const FundamentalSnapshot> fundamentals_of(std::size_t stock) const;

  double benchmark_close(std::size_t day) const { return benchmark_[day]; }
  std::span<const double> benchmark_closes() const { return benchmark_; }
  std::vector<PricePoint> benchmark_series() const;
  /// Close series of one stock over the days it has bars.
  std::vector<PricePoint> close_series(std::size_t stock) const;

  std::size_t bar_count() const { return bars_.size(); }
  std::size_t fundamental_count() const { return fundamentals_.size(); }

  /// Copies of the raw rows, in (stock, date) order; used to derive modified datasets.
  const std::vector<TradeBar>& all_bars() const { return bars_; }
  const std::vector<FundamentalSnapshot>& all_fundamentals() const { return fundamentals_; }

 private:
  TradingCalendar calendar_;
  std::vector<StockId> stocks_;
  std::vector<TradeBar> bars_;
  std::vector<std::size_t> bar_offsets_;
  std::vector<std::vector<std::int32_t>> bar_at_;
  std::vector<FundamentalSnapshot> fundamentals_;
  std::vector<std::size_t> fundamental_offsets_;
  std::vector<double> benchmark_;
};

MarketDataset load_dataset(const std::string& bars_path, const std::string& fundamentals_path,
                           const std::string& benchmark_path, const LoadOptions& options = {});

struct EligibilityRules {
  /// Trading days of bar history required before the date; 0 disables the rule.
  int min_history_days = 252;
  bool require_not_suspended = true;
  bool require_fundamentals = true;
  bool exclude_limit_locked = false;
  double price_limit = 0.10;
};

/// Ascending ids of the stocks passing every enabled rule on a trading date.
std::vector<StockId> eligible_universe(const MarketDataset& dataset, Date date,
                                       const EligibilityRules& rules = {});

}  // namespace deeprank
