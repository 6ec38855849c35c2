#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "deeprank/date.hpp"
#include "deeprank/marketdata.hpp"

namespace deeprank {

/// Shape of the benchmark over the final months of a synthetic market.
enum class Regime {
  inflection,           ///< decline, then recovery (Jun-Dec 2015 pattern)
  fluctuating_decline,  ///< alternating signs ending negative (Jun-Dec 2018 pattern)
  crash,                ///< monotone heavy decline
};

std::optional<Regime> parse_regime(std::string_view name);
std::string_view regime_name(Regime regime);

/// Monthly benchmark returns used for the regime window.
std::vector<double> regime_monthly_returns(Regime regime, int months);

struct SyntheticMarketConfig {
  std::uint64_t seed = 1;
  int n_stocks = 300;
  Date start = Date::from_ymd(2013, 1, 1);
  Date end = Date::from_ymd(2015, 12, 31);
  Regime regime = Regime::crash;
  /// The regime applies to this many trailing calendar months of [start, end].
  int regime_months = 6;
  /// How strongly the latent mispricing drives next-month excess return, in [0, 1].
  double planted_signal_strength = 0.5;
  /// Daily idiosyncratic volatility of stock log returns.
  double noise_level = 0.01;
  /// Per stock-day probability that a 1-5 day suspension starts.
  double suspension_rate = 0.002;

  /// Throws ConfigError.
  void validate() const;
};

/// Generated data plus the latent per-stock quality that drives returns.
struct SyntheticMarket {
  MarketDataset dataset;
  /// Last trading day of every month, ascending.
  std::vector<Date> month_ends;
  /// latent[k][s]: mispricing of stock s (dataset order) at month_ends[k];
  /// positive means priced below fair value.
  std::vector<std::vector<double>> latent;
  DateRange regime_window;
};

SyntheticMarket generate_synthetic_market_detailed(const SyntheticMarketConfig& config);
MarketDataset generate_synthetic_market(const SyntheticMarketConfig& config);

}  // namespace deeprank
