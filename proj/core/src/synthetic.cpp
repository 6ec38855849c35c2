#include "deeprank/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "deeprank/error.hpp"
#include "deeprank/rng.hpp"

namespace deeprank {

namespace {

// Model constants.
constexpr double kBenchmarkStart = 1000.0;
constexpr double kBenchmarkDailyVol = 0.012;
constexpr double kHistoryMonthlyMean = 0.005;
constexpr double kHistoryMonthlyVol = 0.03;
constexpr double kCrashMonthly = -0.065;
constexpr double kFairLogCapBase = 22.33;  // ln(5e9)
constexpr double kFairLoading = 0.8;       // d(fair log cap) / d(profitability)
constexpr double kProfitabilityPersistence = 0.98;
constexpr double kInitialMispricingVol = 0.15;
constexpr double kMaxReversion = 0.5;  // monthly share of mispricing recovered at full strength

struct StockParams {
  double beta;
  double log_shares;
  double book_to_price;
  double base_turnover;
  double leverage;
  double asset_turnover;
  double gross_margin;
  double operating_margin;
  double debt_ratio;
  double nonrecurring_share;
  double opcash_share;
  double cash_ratio;
  double current_asset_ratio;
  double current_liability_ratio;
  int industry;
};

struct MonthSpan {
  std::size_t first;
  std::size_t last;
};

}  // namespace

std::optional<Regime> parse_regime(std::string_view name) {
  if (name == "inflection") return Regime::inflection;
  if (name == "fluctuating-decline" || name == "fluctuating_decline") {
    return Regime::fluctuating_decline;
  }
  if (name == "crash") return Regime::crash;
  return std::nullopt;
}

std::string_view regime_name(Regime regime) {
  switch (regime) {
    case Regime::inflection: return "inflection";
    case Regime::fluctuating_decline: return "fluctuating-decline";
    case Regime::crash: return "crash";
  }
  return "?";
}

std::vector<double> regime_monthly_returns(Regime regime, int months) {
  static const double inflection[] = {-0.08, -0.15, -0.12, -0.05, 0.10, 0.01, 0.05};
  static const double fluctuating[] = {-0.08, 0.00, -0.05, 0.03, -0.08, 0.01, -0.05};
  std::vector<double> out;
  for (int m = 0; m < months; ++m) {
    switch (regime) {
      case Regime::inflection: out.push_back(inflection[m % 7]); break;
      case Regime::fluctuating_decline: out.push_back(fluctuating[m % 7]); break;
      case Regime::crash: out.push_back(kCrashMonthly); break;
    }
  }
  return out;
}

void SyntheticMarketConfig::validate() const {
  if (n_stocks < 10) throw ConfigError("marketdata", "n_stocks must be >= 10");
  if (!(planted_signal_strength >= 0.0 && planted_signal_strength <= 1.0)) {
    throw ConfigError("marketdata", "planted_signal_strength must be in [0, 1]");
  }
  if (!(noise_level >= 0.0 && noise_level < 0.2)) {
    throw ConfigError("marketdata", "noise_level must be in [0, 0.2)");
  }
  if (!(suspension_rate >= 0.0 && suspension_rate <= 0.1)) {
    throw ConfigError("marketdata", "suspension_rate must be in [0, 0.1]");
  }
  if (!(start < end)) throw ConfigError("marketdata", "start must precede end");
  if (regime_months < 1) throw ConfigError("marketdata", "regime_months must be >= 1");
  const int months = end.month_key() - start.month_key() + 1;
  if (regime_months > months) {
    throw ConfigError("marketdata", fmt::format("regime_months {} exceeds the {} months in range",
                                                regime_months, months));
  }
}

SyntheticMarket generate_synthetic_market_detailed(const SyntheticMarketConfig& config) {
  config.validate();
  Rng rng(config.seed);

  std::vector<Date> dates;
  for (Date d = config.start; d <= config.end; d = d + 1) {
    if (!d.is_weekend()) dates.push_back(d);
  }
  if (dates.size() < 2) throw ConfigError("marketdata", "date range holds fewer than 2 trading days");
  const TradingCalendar calendar(dates);
  const std::size_t n_days = dates.size();

  std::vector<MonthSpan> months;
  for (std::size_t i = 0; i < n_days; ++i) {
    if (i == 0 || dates[i].month_key() != dates[i - 1].month_key()) months.push_back({i, i});
    months.back().last = i;
  }
  const std::size_t n_months = months.size();
  const std::size_t regime_from = n_months - std::min<std::size_t>(n_months, config.regime_months);

  // Benchmark: each month's daily log returns are bridged so the month compounds exactly.
  const auto regime_returns = regime_monthly_returns(config.regime, config.regime_months);
  std::vector<double> bench_ret(n_days, 0.0);
  for (std::size_t m = 0; m < n_months; ++m) {
    const double target = m >= regime_from ? regime_returns[m - regime_from]
                                           : rng.normal(kHistoryMonthlyMean, kHistoryMonthlyVol);
    const std::size_t first = m == 0 ? 1 : months[m].first;
    const std::size_t last = months[m].last;
    if (first > last) continue;
    const std::size_t n = last - first + 1;
    std::vector<double> z(n);
    double mean = 0.0;
    for (auto& v : z) {
      v = rng.normal();
      mean += v;
    }
    mean /= static_cast<double>(n);
    const double drift = std::log1p(target) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      bench_ret[first + j] = std::expm1(drift + kBenchmarkDailyVol * (z[j] - mean));
    }
  }
  std::vector<PricePoint> benchmark(n_days);
  {
    double level = kBenchmarkStart;
    for (std::size_t i = 0; i < n_days; ++i) {
      if (i > 0) level *= 1.0 + bench_ret[i];
      benchmark[i] = {dates[i], level};
    }
  }

  const auto n_stocks = static_cast<std::size_t>(config.n_stocks);
  std::vector<StockParams> params(n_stocks);
  for (auto& p : params) {
    p.beta = rng.uniform(0.8, 1.2);
    p.log_shares = rng.normal(std::log(2e8), 0.8);
    p.book_to_price = std::exp(rng.normal(std::log(0.6), 0.08));
    p.base_turnover = rng.uniform(0.005, 0.03);
    p.leverage = rng.uniform(1.3, 3.5);
    p.asset_turnover = rng.uniform(0.3, 1.2);
    p.gross_margin = rng.uniform(0.15, 0.45);
    p.operating_margin = rng.uniform(0.05, 0.2);
    p.debt_ratio = rng.uniform(0.05, 0.4);
    p.nonrecurring_share = rng.uniform(0.0, 0.15);
    p.opcash_share = rng.uniform(0.8, 1.4);
    p.cash_ratio = rng.uniform(0.05, 0.2);
    p.current_asset_ratio = rng.uniform(0.2, 0.5);
    p.current_liability_ratio = rng.uniform(0.1, 0.4);
    p.industry = static_cast<int>(rng.below(10));
  }

  std::vector<double> profitability(n_stocks), prev_profitability(n_stocks);
  std::vector<double> market_path(n_stocks, 0.0);  // cumulative systematic log return
  std::vector<double> log_cap(n_stocks), mispricing(n_stocks);
  std::vector<double> prev_total_assets(n_stocks, 0.0);
  for (std::size_t s = 0; s < n_stocks; ++s) {
    profitability[s] = rng.normal();
    prev_profitability[s] = profitability[s];
    mispricing[s] = rng.normal(0.0, kInitialMispricingVol);
    log_cap[s] = kFairLogCapBase + kFairLoading * profitability[s] - mispricing[s];
  }

  std::vector<StockId> ids(n_stocks);
  for (std::size_t s = 0; s < n_stocks; ++s) ids[s] = fmt::format("S{:04d}", s + 1);

  std::vector<TradeBar> bars;
  bars.reserve(n_stocks * n_days);
  std::vector<FundamentalSnapshot> fundamentals;
  fundamentals.reserve(n_stocks * (n_months + 1));

  std::vector<double> last_close(n_stocks, 0.0);
  std::vector<int> suspended_left(n_stocks, 0);

  SyntheticMarket out;
  out.regime_window = {dates[months[regime_from].first], dates.back()};

  const auto snapshot = [&](std::size_t s, std::size_t day) {
    const auto& p = params[s];
    const double fair = kFairLogCapBase + kFairLoading * profitability[s] + market_path[s];
    const double equity = p.book_to_price * std::exp(fair);
    const double roe = 0.08 + 0.04 * profitability[s];
    FundamentalSnapshot f;
    f.stock_id = ids[s];
    f.date = dates[day];
    f.net_assets = equity;
    f.equity = equity;
    f.net_profit = roe * equity;
    f.non_recurring_gain_loss = f.net_profit * p.nonrecurring_share * std::exp(0.1 * rng.normal());
    f.total_assets = equity * p.leverage * std::exp(0.02 * rng.normal());
    f.avg_total_assets =
        prev_total_assets[s] > 0.0 ? 0.5 * (f.total_assets + prev_total_assets[s]) : f.total_assets;
    prev_total_assets[s] = f.total_assets;
    f.long_term_debt = f.total_assets * p.debt_ratio;
    f.operating_revenue = f.total_assets * p.asset_turnover * std::exp(0.02 * rng.normal());
    f.gross_profit = f.operating_revenue * p.gross_margin;
    f.operate_income = f.operating_revenue * p.operating_margin;
    f.net_cash_flow = equity * (0.01 + 0.02 * rng.normal());
    f.net_operate_cash_flow = f.net_profit * p.opcash_share + equity * 0.01 * rng.normal();
    f.net_profit_growth = 0.05 + 0.5 * (profitability[s] - prev_profitability[s]);
    f.cash = f.total_assets * p.cash_ratio;
    f.current_assets = f.total_assets * p.current_asset_ratio;
    f.current_liabilities = f.total_assets * p.current_liability_ratio;
    f.industry_code = p.industry;
    fundamentals.push_back(std::move(f));
  };

  std::size_t month = 0;
  const double reversion = kMaxReversion * config.planted_signal_strength;
  for (std::size_t day = 0; day < n_days; ++day) {
    while (months[month].last < day) ++month;
    const double days_in_month =
        static_cast<double>(months[month].last - (month == 0 ? 1 : months[month].first) + 1);
    for (std::size_t s = 0; s < n_stocks; ++s) {
      const auto& p = params[s];
      if (day > 0) {
        const double systematic = std::log1p(p.beta * bench_ret[day]);
        market_path[s] += systematic;
        log_cap[s] += systematic + config.noise_level * rng.normal() +
                      reversion * mispricing[s] / days_in_month;
      }
      bool suspended = false;
      if (suspended_left[s] > 0) {
        --suspended_left[s];
        suspended = true;
      } else if (day > 0 && rng.uniform() < config.suspension_rate) {
        suspended_left[s] = static_cast<int>(rng.below(5));
        suspended = true;
      }
      const double turnover = p.base_turnover * std::exp(0.25 * rng.normal() - 0.03125);
      const double shares = std::exp(p.log_shares);
      TradeBar b;
      b.stock_id = ids[s];
      b.date = dates[day];
      b.is_suspended = suspended;
      if (suspended) {
        b.close = last_close[s];
        b.prev_close = last_close[s];
        b.volume = 0.0;
        b.turnover_ratio = 0.0;
      } else {
        const double close = std::exp(log_cap[s] - p.log_shares);
        b.close = close;
        b.prev_close = day == 0 ? close : last_close[s];
        b.turnover_ratio = turnover;
        b.volume = turnover * shares;
        last_close[s] = close;
      }
      b.market_cap = b.close * shares;
      bars.push_back(std::move(b));
    }

    const bool month_end = day == months[month].last;
    if (day == 0 && !month_end) {
      for (std::size_t s = 0; s < n_stocks; ++s) snapshot(s, day);
    }
    if (month_end) {
      std::vector<double> latent(n_stocks);
      for (std::size_t s = 0; s < n_stocks; ++s) {
        prev_profitability[s] = profitability[s];
        if (day > 0) {
          profitability[s] = kProfitabilityPersistence * profitability[s] +
                             std::sqrt(1.0 - kProfitabilityPersistence * kProfitabilityPersistence) *
                                 rng.normal();
        }
        const double fair = kFairLogCapBase + kFairLoading * profitability[s] + market_path[s];
        mispricing[s] = fair - log_cap[s];
        latent[s] = mispricing[s];
        snapshot(s, day);
      }
      out.month_ends.push_back(dates[day]);
      out.latent.push_back(std::move(latent));
    }
  }

  out.dataset = MarketDataset::build(std::move(bars), std::move(fundamentals), std::move(benchmark));
  return out;
}

MarketDataset generate_synthetic_market(const SyntheticMarketConfig& config) {
  return generate_synthetic_market_detailed(config).dataset;
}

}  // namespace deeprank
