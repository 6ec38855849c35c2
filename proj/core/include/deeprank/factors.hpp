#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "deeprank/date.hpp"
#include "deeprank/marketdata.hpp"
#include "deeprank/matrix.hpp"

namespace deeprank {

inline constexpr std::size_t kFactorCount = 47;
inline constexpr int kTradingDaysPerMonth = 21;
inline constexpr int kBetaWindowDays = 252;
inline constexpr int kTwoYearWindowDays = 504;
inline constexpr int kMacdWindowDays = 252;
inline constexpr int kMacdMinObservations = 35;

/// The 47 cross-sectional factors, in appendix order. Underlying value = 0-based column.
enum class FactorId : int {
  EP, LN_PRICE, EP_CUT, BP, SP, NCFP, OCFP, G_PE, ROE, ROA,
  GROSS_MARGIN, PROFIT_MARGIN, ASSET_TURNOVER, OP_CASHFLOW_RATIO, FIN_LEVERAGE,
  DEBT_EQUITY, CASH_RATIO, CURRENT_RATIO, LN_MCAP,
  RET_1M, RET_3M, RET_6M, RET_12M,
  RETTO_MEAN_1M, RETTO_MEAN_3M, RETTO_MEAN_6M, RETTO_MEAN_12M,
  RETTO_DECAY_1M, RETTO_DECAY_3M, RETTO_DECAY_6M, RETTO_DECAY_12M,
  RET_STD_1M, RET_STD_3M, RET_STD_6M, RET_STD_12M,
  TO_1M_MINUS1, TO_3M_MINUS1, TO_6M_MINUS1, TO_12M_MINUS1,
  TO_REL2Y_1M, TO_REL2Y_3M, TO_REL2Y_6M, TO_REL2Y_12M,
  BETA, MACD, DEA, DIF,
};

constexpr std::size_t column(FactorId id) { return static_cast<std::size_t>(id); }
/// 1-based appendix row.
constexpr int appendix_row(FactorId id) { return static_cast<int>(id) + 1; }
std::string_view factor_name(FactorId id);
std::string_view factor_name(std::size_t column);

struct FactorVector {
  StockId stock_id;
  Date date;
  std::array<double, kFactorCount> values{};
  std::array<bool, kFactorCount> missing{};

  double operator[](FactorId id) const { return values[column(id)]; }
  bool is_missing(FactorId id) const { return missing[column(id)]; }
  std::size_t missing_count() const;
};

/// e[0] = x[0]; e[t] = e[t-1] + k (x[t] - e[t-1]), k = 2 / (n + 1).
std::vector<double> ema(std::span<const double> series, int n);

struct MacdIndicators {
  double dif = 0.0;
  double dea = 0.0;
  double macd = 0.0;
};

/// DIF = EMA12 - EMA26, DEA = EMA9(DIF), MACD = 2 (DIF - DEA), all at the last observation.
MacdIndicators macd_indicators(std::span<const double> closes);

/// OLS slope of stock returns on benchmark returns. Needs >= 60 paired observations.
double rolling_beta(std::span<const double> stock_returns, std::span<const double> benchmark_returns);

/// Raw (unnormalized) factors from data dated at or before `date`. Missing inputs are masked.
FactorVector compute_raw_factors(const MarketDataset& dataset, std::string_view stock, Date date);
FactorVector compute_raw_factors(const MarketDataset& dataset, std::size_t stock, std::size_t day);

/// Per-column statistics of one normalization fit.
struct NormalizationStats {
  std::array<double, kFactorCount> median{};
  std::array<double, kFactorCount> lower{};
  std::array<double, kFactorCount> upper{};
  std::array<double, kFactorCount> mean{};
  std::array<double, kFactorCount> stddev{};
  std::array<bool, kFactorCount> constant{};
};

struct FactorPanel {
  Date date;
  std::vector<StockId> stocks;
  DenseMatrix matrix;               ///< stocks.size() x 47
  std::vector<std::uint8_t> missing;  ///< row-major mask, same shape as matrix
  bool normalized = false;
  NormalizationStats stats;         ///< meaningful when normalized

  std::size_t size() const { return stocks.size(); }
  bool is_missing(std::size_t row, std::size_t col) const { return missing[row * kFactorCount + col] != 0; }
  /// Row index of a stock, or npos.
  std::size_t find(std::string_view stock) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Stocks with more than half of their factors missing are left out of a panel.
inline constexpr std::size_t kMaxMissingFactors = kFactorCount / 2;

/// Raw panel, one row per usable universe stock, ascending stock id.
FactorPanel build_panel(const MarketDataset& dataset, std::span<const StockId> universe, Date date);

/// Median imputation, +-5 sd winsorization, population z-score.
NormalizationStats fit_normalization(const FactorPanel& raw);
FactorPanel apply_normalization(const FactorPanel& raw, const NormalizationStats& stats);
FactorPanel normalize_panel(const FactorPanel& raw);

/// Stacks raw panels row-wise (for pooled normalization fits). Date of the result is the last panel's.
FactorPanel stack_panels(std::span<const FactorPanel> panels);

}  // namespace deeprank
