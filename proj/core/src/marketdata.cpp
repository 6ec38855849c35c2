#include "deeprank/marketdata.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "deeprank/csv.hpp"
#include "deeprank/error.hpp"

namespace deeprank {

TradingCalendar::TradingCalendar(std::vector<Date> dates) : dates_(std::move(dates)) {
  for (std::size_t i = 1; i < dates_.size(); ++i) {
    if (!(dates_[i - 1] < dates_[i])) {
      throw ValidationError(fmt::format("calendar dates not strictly increasing at {}",
                                        dates_[i].to_string()));
    }
  }
  for (std::size_t i = 0; i < dates_.size(); ++i) {
    if (i + 1 == dates_.size() || dates_[i + 1].month_key() != dates_[i].month_key()) {
      month_ends_.push_back(i);
    }
  }
}

std::optional<std::size_t> TradingCalendar::index_of(Date d) const {
  const auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end() || *it != d) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

std::optional<std::size_t> TradingCalendar::index_at_or_before(Date d) const {
  const auto it = std::upper_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.begin()) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin()) - 1;
}

bool TradingCalendar::is_month_end(std::size_t index) const {
  return std::binary_search(month_ends_.begin(), month_ends_.end(), index);
}

std::vector<Date> action_days(const TradingCalendar& calendar, DateRange range) {
  std::vector<Date> out;
  for (const auto idx : calendar.month_end_indices()) {
    if (range.contains(calendar[idx])) out.push_back(calendar[idx]);
  }
  return out;
}

double period_return(std::span<const PricePoint> series, Date t0, Date t1) {
  const auto find = [&](Date d) {
    const auto it = std::lower_bound(series.begin(), series.end(), d,
                                     [](const PricePoint& p, Date v) { return p.date < v; });
    if (it == series.end() || it->date != d) {
      throw LookupError("marketdata", fmt::format("no price on {}", d.to_string()));
    }
    return it->price;
  };
  if (!(t0 < t1)) throw ArgumentError("marketdata", "period_return requires t0 < t1");
  const double p0 = find(t0);
  const double p1 = find(t1);
  if (!(p0 > 0.0) || !(p1 > 0.0)) throw ArgumentError("marketdata", "prices must be positive");
  return p1 / p0 - 1.0;
}

namespace {

void validate_bar(const TradeBar& b, const LoadOptions& options) {
  const auto where = [&] { return fmt::format("stock {} on {}", b.stock_id, b.date.to_string()); };
  const auto finite = std::isfinite(b.close) && std::isfinite(b.prev_close) &&
                      std::isfinite(b.volume) && std::isfinite(b.turnover_ratio) &&
                      std::isfinite(b.market_cap);
  if (!finite) throw ValidationError(fmt::format("non-finite bar field for {}", where()));
  if (b.volume < 0.0) throw ValidationError(fmt::format("negative volume for {}", where()));
  if (b.turnover_ratio < 0.0) {
    throw ValidationError(fmt::format("negative turnover_ratio for {}", where()));
  }
  if (!b.is_suspended) {
    if (!(b.close > 0.0)) throw ValidationError(fmt::format("close must be > 0 for {}", where()));
    if (!(b.market_cap > 0.0)) {
      throw ValidationError(fmt::format("market_cap must be > 0 for {}", where()));
    }
  }
  if (options.enforce_price_limit && b.prev_close > 0.0 &&
      std::abs(b.close / b.prev_close - 1.0) > options.price_limit + 1e-9) {
    throw ValidationError(fmt::format("price limit exceeded for {}", where()));
  }
}

void validate_fundamental(const FundamentalSnapshot& f) {
  const auto where = [&] { return fmt::format("stock {} on {}", f.stock_id, f.date.to_string()); };
  const double fields[] = {f.net_profit,        f.non_recurring_gain_loss, f.net_assets,
                           f.total_assets,      f.avg_total_assets,        f.long_term_debt,
                           f.operating_revenue, f.operate_income,          f.gross_profit,
                           f.net_cash_flow,     f.net_operate_cash_flow,   f.net_profit_growth,
                           f.cash,              f.current_assets,          f.current_liabilities,
                           f.equity};
  for (double v : fields) {
    if (!std::isfinite(v)) throw ValidationError(fmt::format("non-finite fundamental for {}", where()));
  }
  if (!(f.net_assets > 0.0)) throw ValidationError(fmt::format("net_assets must be > 0 for {}", where()));
  if (f.total_assets < f.net_assets) {
    throw ValidationError(fmt::format("total_assets < net_assets for {}", where()));
  }
  if (!(f.current_liabilities > 0.0)) {
    throw ValidationError(fmt::format("current_liabilities must be > 0 for {}", where()));
  }
}

}  // namespace

MarketDataset MarketDataset::build(std::vector<TradeBar> bars,
                                   std::vector<FundamentalSnapshot> fundamentals,
                                   std::vector<PricePoint> benchmark, const LoadOptions& options) {
  MarketDataset ds;

  std::sort(benchmark.begin(), benchmark.end(),
            [](const PricePoint& a, const PricePoint& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < benchmark.size(); ++i) {
    if (benchmark[i].date == benchmark[i - 1].date) {
      throw ValidationError(fmt::format("duplicate benchmark date {}", benchmark[i].date.to_string()));
    }
  }
  for (const auto& p : benchmark) {
    if (!std::isfinite(p.price) || !(p.price > 0.0)) {
      throw ValidationError(fmt::format("benchmark close must be > 0 on {}", p.date.to_string()));
    }
  }

  std::vector<Date> dates;
  dates.reserve(benchmark.size());
  for (const auto& p : benchmark) dates.push_back(p.date);
  ds.calendar_ = TradingCalendar(dates);
  ds.benchmark_.reserve(benchmark.size());
  for (const auto& p : benchmark) ds.benchmark_.push_back(p.price);

  std::sort(bars.begin(), bars.end(), [](const TradeBar& a, const TradeBar& b) {
    return a.stock_id != b.stock_id ? a.stock_id < b.stock_id : a.date < b.date;
  });
  std::sort(fundamentals.begin(), fundamentals.end(),
            [](const FundamentalSnapshot& a, const FundamentalSnapshot& b) {
              return a.stock_id != b.stock_id ? a.stock_id < b.stock_id : a.date < b.date;
            });

  std::set<StockId> ids;
  for (const auto& b : bars) ids.insert(b.stock_id);
  ds.stocks_.assign(ids.begin(), ids.end());

  const std::size_t n_days = ds.calendar_.size();
  ds.bar_at_.assign(ds.stocks_.size(), std::vector<std::int32_t>(n_days, -1));
  ds.bar_offsets_.assign(ds.stocks_.size() + 1, 0);
  std::size_t s = 0;
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& b = bars[i];
    validate_bar(b, options);
    while (ds.stocks_[s] != b.stock_id) ds.bar_offsets_[++s] = i;
    if (i > 0 && bars[i - 1].stock_id == b.stock_id && bars[i - 1].date == b.date) {
      throw ValidationError(fmt::format("duplicate bar for stock {} on {}", b.stock_id, b.date.to_string()));
    }
    const auto day = ds.calendar_.index_of(b.date);
    if (!day) {
      throw ValidationError(fmt::format("benchmark missing date {} (bar of stock {})",
                                        b.date.to_string(), b.stock_id));
    }
    ds.bar_at_[s][*day] = static_cast<std::int32_t>(i);
  }
  for (std::size_t k = s + 1; k <= ds.stocks_.size(); ++k) ds.bar_offsets_[k] = bars.size();
  ds.bars_ = std::move(bars);

  ds.fundamental_offsets_.assign(ds.stocks_.size() + 1, 0);
  std::vector<FundamentalSnapshot> kept;
  kept.reserve(fundamentals.size());
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < ds.stocks_.size(); ++k) {
    ds.fundamental_offsets_[k] = kept.size();
    while (cursor < fundamentals.size() && fundamentals[cursor].stock_id < ds.stocks_[k]) {
      throw ValidationError(fmt::format("fundamentals for unknown stock {}", fundamentals[cursor].stock_id));
    }
    while (cursor < fundamentals.size() && fundamentals[cursor].stock_id == ds.stocks_[k]) {
      const auto& f = fundamentals[cursor];
      validate_fundamental(f);
      if (!kept.empty() && kept.back().stock_id == f.stock_id && kept.back().date == f.date) {
        throw ValidationError(fmt::format("duplicate fundamentals for stock {} on {}", f.stock_id,
                                          f.date.to_string()));
      }
      kept.push_back(f);
      ++cursor;
    }
  }
  if (cursor < fundamentals.size()) {
    throw ValidationError(fmt::format("fundamentals for unknown stock {}", fundamentals[cursor].stock_id));
  }
  ds.fundamental_offsets_[ds.stocks_.size()] = kept.size();
  ds.fundamentals_ = std::move(kept);
  return ds;
}

std::optional<std::size_t> MarketDataset::stock_index(std::string_view id) const {
  const auto it = std::lower_bound(stocks_.begin(), stocks_.end(), id);
  if (it == stocks_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - stocks_.begin());
}

const TradeBar* MarketDataset::bar(std::size_t stock, std::size_t day) const {
  const auto idx = bar_at_[stock][day];
  return idx < 0 ? nullptr : &bars_[static_cast<std::size_t>(idx)];
}

const TradeBar* MarketDataset::bar(std::string_view stock, Date date) const {
  const auto s = stock_index(stock);
  const auto d = calendar_.index_of(date);
  if (!s || !d) return nullptr;
  return bar(*s, *d);
}

std::span<const TradeBar> MarketDataset::bars_of(std::size_t stock) const {
  return std::span<const TradeBar>(bars_).subspan(bar_offsets_[stock],
                                                  bar_offsets_[stock + 1] - bar_offsets_[stock]);
}

std::optional<std::size_t> MarketDataset::first_bar_day(std::size_t stock) const {
  const auto b = bars_of(stock);
  if (b.empty()) return std::nullopt;
  return calendar_.index_of(b.front().date);
}

std::optional<double> MarketDataset::last_close(std::size_t stock, std::size_t day) const {
  const auto b = bars_of(stock);
  const Date d = calendar_[day];
  const auto it = std::upper_bound(b.begin(), b.end(), d,
                                   [](Date v, const TradeBar& x) { return v < x.date; });
  for (auto r = it; r != b.begin();) {
    --r;
    if (r->close > 0.0) return r->close;
  }
  return std::nullopt;
}

const FundamentalSnapshot* MarketDataset::fundamentals_as_of(std::size_t stock, Date date) const {
  const auto f = fundamentals_of(stock);
  const auto it = std::upper_bound(f.begin(), f.end(), date,
                                   [](Date v, const FundamentalSnapshot& x) { return v < x.date; });
  if (it == f.begin()) return nullptr;
  return &*(it - 1);
}

std::span<const FundamentalSnapshot> MarketDataset::fundamentals_of(std::size_t stock) const {
  return std::span<const FundamentalSnapshot>(fundamentals_).subspan(
      fundamental_offsets_[stock], fundamental_offsets_[stock + 1] - fundamental_offsets_[stock]);
}

std::vector<PricePoint> MarketDataset::benchmark_series() const {
  std::vector<PricePoint> out(calendar_.size());
  for (std::size_t i = 0; i < calendar_.size(); ++i) out[i] = {calendar_[i], benchmark_[i]};
  return out;
}

std::vector<PricePoint> MarketDataset::close_series(std::size_t stock) const {
  std::vector<PricePoint> out;
  for (const auto& b : bars_of(stock)) {
    if (b.close > 0.0) out.push_back({b.date, b.close});
  }
  return out;
}

MarketDataset load_dataset(const std::string& bars_path, const std::string& fundamentals_path,
                           const std::string& benchmark_path, const LoadOptions& options) {
  std::vector<TradeBar> bars;
  {
    csv::Reader reader(bars_path, {"stock_id", "date", "close", "prev_close", "volume",
                                   "turnover_ratio", "market_cap", "is_suspended"});
    bars.reserve(reader.rows().size());
    for (const auto& r : reader.rows()) {
      TradeBar b;
      b.stock_id = std::string(r.text(0));
      if (b.stock_id.empty()) r.fail(0, "empty stock_id");
      b.date = r.date(1);
      b.close = r.number(2);
      b.prev_close = r.number(3);
      b.volume = r.number(4);
      b.turnover_ratio = r.number(5);
      b.market_cap = r.number(6);
      b.is_suspended = r.flag(7);
      bars.push_back(std::move(b));
    }
  }
  std::vector<FundamentalSnapshot> fundamentals;
  {
    csv::Reader reader(fundamentals_path,
                       {"stock_id", "date", "net_profit", "non_recurring_gain_loss", "net_assets",
                        "total_assets", "avg_total_assets", "long_term_debt", "operating_revenue",
                        "operate_income", "gross_profit", "net_cash_flow", "net_operate_cash_flow",
                        "net_profit_growth", "cash", "current_assets", "current_liabilities",
                        "equity", "industry_code"});
    fundamentals.reserve(reader.rows().size());
    for (const auto& r : reader.rows()) {
      FundamentalSnapshot f;
      f.stock_id = std::string(r.text(0));
      if (f.stock_id.empty()) r.fail(0, "empty stock_id");
      f.date = r.date(1);
      f.net_profit = r.number(2);
      f.non_recurring_gain_loss = r.number(3);
      f.net_assets = r.number(4);
      f.total_assets = r.number(5);
      f.avg_total_assets = r.number(6);
      f.long_term_debt = r.number(7);
      f.operating_revenue = r.number(8);
      f.operate_income = r.number(9);
      f.gross_profit = r.number(10);
      f.net_cash_flow = r.number(11);
      f.net_operate_cash_flow = r.number(12);
      f.net_profit_growth = r.number(13);
      f.cash = r.number(14);
      f.current_assets = r.number(15);
      f.current_liabilities = r.number(16);
      f.equity = r.number(17);
      f.industry_code = r.integer(18);
      fundamentals.push_back(std::move(f));
    }
  }
  std::vector<PricePoint> benchmark;
  {
    csv::Reader reader(benchmark_path, {"date", "close"});
    benchmark.reserve(reader.rows().size());
    for (const auto& r : reader.rows()) benchmark.push_back({r.date(0), r.number(1)});
  }
  return MarketDataset::build(std::move(bars), std::move(fundamentals), std::move(benchmark), options);
}

std::vector<StockId> eligible_universe(const MarketDataset& dataset, Date date,
                                       const EligibilityRules& rules) {
  const auto day = dataset.calendar().index_of(date);
  if (!day) throw LookupError("marketdata", fmt::format("{} is not a trading date", date.to_string()));
  std::vector<StockId> out;
  for (std::size_t s = 0; s < dataset.stock_count(); ++s) {
    const auto first = dataset.first_bar_day(s);
    if (!first || *first > *day) continue;
    if (rules.min_history_days > 0 &&
        *day - *first < static_cast<std::size_t>(rules.min_history_days)) {
      continue;
    }
    const TradeBar* b = dataset.bar(s, *day);
    if (rules.require_not_suspended && (b == nullptr || b->is_suspended)) continue;
    if (rules.require_fundamentals && dataset.fundamentals_as_of(s, date) == nullptr) continue;
    if (rules.exclude_limit_locked && b != nullptr && !b->is_suspended && b->prev_close > 0.0 &&
        std::abs(b->close / b->prev_close - 1.0) >= rules.price_limit * (1.0 - 1e-9)) {
      continue;
    }
    out.push_back(dataset.stocks()[s]);
  }
  return out;
}

}  // namespace deeprank
