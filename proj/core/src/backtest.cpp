#include "deeprank/backtest.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "deeprank/error.hpp"

namespace deeprank {

std::string_view side_name(Side side) { return side == Side::buy ? "buy" : "sell"; }

void CostModel::validate() const {
  const auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!ok(commission_rate) || !ok(sell_tax_rate) || !ok(lot_size)) {
    throw ConfigError("backtest", "cost rates and lot size must be finite and >= 0");
  }
  if (commission_rate + sell_tax_rate >= 1.0) throw ConfigError("backtest", "cost rates must sum below 1");
}

void ScenarioConfig::validate() const {
  if (range.last < range.first) throw ConfigError("backtest", "scenario range ends before it starts");
  if (holdings < 1) throw ConfigError("backtest", fmt::format("holdings must be >= 1, got {}", holdings));
  if (!(initial_capital > 0.0) || !std::isfinite(initial_capital)) {
    throw ConfigError("backtest", "initial capital must be positive");
  }
  if (strategy.window < 1) throw ConfigError("backtest", "window must be >= 1");
  costs.validate();
  strategy.train.validate();
}

namespace {

double price_of(const PriceMap& prices, const StockId& id, Date date) {
  const auto it = prices.find(id);
  if (it == prices.end() || !(it->second > 0.0) || !std::isfinite(it->second)) {
    throw RebalanceError(fmt::format("no price for {} on {}", id, date.to_string()));
  }
  return it->second;
}

double round_lot(double shares, double lot) {
  if (lot <= 0.0) return shares;
  return std::floor(shares / lot + 1e-9) * lot;
}

}  // namespace

double mark_to_market(const Portfolio& portfolio, const PriceMap& prices) {
  double v = portfolio.cash;
  for (const auto& [id, shares] : portfolio.holdings) {
    const auto it = prices.find(id);
    if (it == prices.end()) throw RebalanceError(fmt::format("no close to value {}", id));
    v += shares * it->second;
  }
  return v;
}

RebalanceOutcome rebalance(Portfolio p, const TargetWeights& targets, const PriceMap& prices,
                           const CostModel& costs, Date date, const std::set<StockId>& frozen) {
  double weight_sum = 0.0;
  for (const auto& [id, w] : targets) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw RebalanceError(fmt::format("bad target weight for {}", id));
    weight_sum += w;
  }
  if (weight_sum > 1.0 + 1e-9) throw RebalanceError(fmt::format("target weights sum to {}", weight_sum));

  RebalanceOutcome out;
  for (const auto& [id, shares] : p.holdings) price_of(prices, id, date);
  out.value_before = mark_to_market(p, prices);

  const double sell_rate = costs.commission_rate + costs.sell_tax_rate;
  const auto sell = [&](const StockId& id, double shares, double price) {
    const double notional = shares * price;
    const double cost = notional * sell_rate;
    p.cash += notional - cost;
    out.costs += cost;
    out.trades.push_back({date, id, Side::sell, shares, price, cost});
  };

  // Liquidate holdings outside the targets.
  for (auto it = p.holdings.begin(); it != p.holdings.end();) {
    if (!targets.contains(it->first) && !frozen.contains(it->first)) {
      sell(it->first, it->second, prices.at(it->first));
      it = p.holdings.erase(it);
    } else {
      ++it;
    }
  }

  const double base = mark_to_market(p, prices);
  struct Order {
    StockId id;
    double shares;
    double price;
  };
  std::vector<Order> buys;
  for (const auto& [id, w] : targets) {
    if (frozen.contains(id)) continue;
    const double price = price_of(prices, id, date);
    const double held = p.holdings.contains(id) ? p.holdings.at(id) : 0.0;
    const double desired = round_lot(w * base / price, costs.lot_size);
    if (desired < held) {
      sell(id, held - desired, price);
      if (desired > 0.0) {
        p.holdings[id] = desired;
      } else {
        p.holdings.erase(id);
      }
    } else if (desired > held) {
      buys.push_back({id, desired - held, price});
    }
  }

  double needed = 0.0;
  for (const auto& b : buys) needed += b.shares * b.price * (1.0 + costs.commission_rate);
  const double scale = needed > p.cash ? (p.cash > 0.0 ? p.cash / needed : 0.0) : 1.0;
  for (const auto& b : buys) {
    double shares = b.shares * scale;
    if (scale < 1.0) shares = round_lot(shares, costs.lot_size);
    if (!(shares > 0.0)) continue;
    const double notional = shares * b.price;
    const double cost = notional * costs.commission_rate;
    p.cash -= notional + cost;
    out.costs += cost;
    p.holdings[b.id] += shares;
    out.trades.push_back({date, b.id, Side::buy, shares, b.price, cost});
  }
  // Scaled buys spend the cash exactly up to rounding.
  if (p.cash < 0.0) {
    if (p.cash < -1e-9 * std::max(1.0, out.value_before)) {
      throw RebalanceError(fmt::format("cash went negative on {}", date.to_string()));
    }
    p.cash = 0.0;
  }
  out.value_after = mark_to_market(p, prices);
  p.last_valuation = out.value_after;
  out.portfolio = std::move(p);
  return out;
}

namespace {

/// Close on `day`, else the last close before it.
std::optional<double> carried_close(const MarketDataset& dataset, std::size_t stock, std::size_t day) {
  const TradeBar* bar = dataset.bar(stock, day);
  if (bar != nullptr && !bar->is_suspended && bar->close > 0.0) return bar->close;
  for (std::size_t j = day; j-- > 0;) {
    const TradeBar* b = dataset.bar(stock, j);
    if (b != nullptr && !b->is_suspended && b->close > 0.0) return b->close;
  }
  return std::nullopt;
}

[[noreturn]] void rethrow_dated(const Error& e, Date date) {
  throw Error(e.category(), e.module(), fmt::format("{}: {}", date.to_string(), e.what()));
}

}  // namespace

BacktestResult run_scenario(const MarketDataset& dataset, const RankingFn& ranker, const ScenarioConfig& config,
                            std::string name) {
  config.validate();
  const auto& cal = dataset.calendar();
  std::vector<std::size_t> days;
  for (std::size_t i = 0; i < cal.size(); ++i) {
    if (config.range.contains(cal[i])) days.push_back(i);
  }
  if (days.size() < 2) {
    throw ConfigError("backtest", fmt::format("scenario {}..{} covers fewer than two trading days",
                                              config.range.first.to_string(), config.range.last.to_string()));
  }

  BacktestResult result;
  result.strategy = std::move(name);
  Portfolio portfolio;
  portfolio.cash = config.initial_capital;
  portfolio.last_valuation = config.initial_capital;

  for (std::size_t k = 0; k < days.size(); ++k) {
    const std::size_t day = days[k];
    const Date date = cal[day];
    PriceMap prices;
    std::set<StockId> frozen;
    for (const auto& [id, shares] : portfolio.holdings) {
      const std::size_t s = *dataset.stock_index(id);
      const auto close = carried_close(dataset, s, day);
      if (!close) throw RebalanceError(fmt::format("{}: no close for held stock {}", date.to_string(), id));
      prices[id] = *close;
      const TradeBar* bar = dataset.bar(s, day);
      if (bar == nullptr || bar->is_suspended) frozen.insert(id);
    }
    const double value = k == 0 ? config.initial_capital : mark_to_market(portfolio, prices);
    result.dates.push_back(date);
    result.values.push_back(value);
    if (k > 0) {
      result.portfolio_returns.push_back(value / result.values[k - 1] - 1.0);
      result.benchmark_returns.push_back(dataset.benchmark_close(day) / dataset.benchmark_close(days[k - 1]) - 1.0);
    }
    portfolio.last_valuation = value;

    if (!cal.is_month_end(day)) continue;
    try {
      const auto universe = eligible_universe(dataset, date, config.eligibility);
      Ranking ranking = universe.empty() ? Ranking{date, {}} : ranker(date, universe);
      TargetWeights targets;
      if (!ranking.entries.empty()) targets = select_targets(ranking, config.holdings);
      for (const auto& [id, w] : targets) {
        const std::size_t s = *dataset.stock_index(id);
        const TradeBar* bar = dataset.bar(s, day);
        if (bar == nullptr || bar->is_suspended || !(bar->close > 0.0)) {
          frozen.insert(id);
        } else {
          prices[id] = bar->close;
        }
      }
      auto outcome = rebalance(std::move(portfolio), targets, prices, config.costs, date, frozen);
      portfolio = std::move(outcome.portfolio);
      result.trades.insert(result.trades.end(), outcome.trades.begin(), outcome.trades.end());
      result.rebalances.push_back({date, outcome.value_before, outcome.value_after, outcome.costs});
      result.rankings.push_back(std::move(ranking));
    } catch (const Error& e) {
      rethrow_dated(e, date);
    }
  }
  return result;
}

BacktestResult run_scenario(const MarketDataset& dataset, StrategyKind kind, const ScenarioConfig& config,
                            FactorCache* cache) {
  FactorCache local(dataset);
  FactorCache* c = cache != nullptr ? cache : &local;
  const StrategyOptions options = config.strategy;
  RankingFn ranker = [&, kind](Date date, const std::vector<StockId>& universe) {
    return rank_stocks(kind, dataset, date, universe, options, c);
  };
  return run_scenario(dataset, ranker, config, std::string(strategy_name(kind)));
}

}  // namespace deeprank
