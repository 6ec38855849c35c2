#include "deeprank/factors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "deeprank/error.hpp"

namespace deeprank {

namespace {

constexpr std::array<std::string_view, kFactorCount> kNames = {
    "EP", "LN_PRICE", "EP_CUT", "BP", "SP", "NCFP", "OCFP", "G_PE", "ROE", "ROA",
    "GROSS_MARGIN", "PROFIT_MARGIN", "ASSET_TURNOVER", "OP_CASHFLOW_RATIO", "FIN_LEVERAGE",
    "DEBT_EQUITY", "CASH_RATIO", "CURRENT_RATIO", "LN_MCAP",
    "RET_1M", "RET_3M", "RET_6M", "RET_12M",
    "RETTO_MEAN_1M", "RETTO_MEAN_3M", "RETTO_MEAN_6M", "RETTO_MEAN_12M",
    "RETTO_DECAY_1M", "RETTO_DECAY_3M", "RETTO_DECAY_6M", "RETTO_DECAY_12M",
    "RET_STD_1M", "RET_STD_3M", "RET_STD_6M", "RET_STD_12M",
    "TO_1M_MINUS1", "TO_3M_MINUS1", "TO_6M_MINUS1", "TO_12M_MINUS1",
    "TO_REL2Y_1M", "TO_REL2Y_3M", "TO_REL2Y_6M", "TO_REL2Y_12M",
    "BETA", "MACD", "DEA", "DIF",
};

constexpr int kMonths[4] = {1, 3, 6, 12};

std::optional<double> ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  const double r = num / den;
  if (!std::isfinite(r)) return std::nullopt;
  return r;
}

class Builder {
 public:
  explicit Builder(FactorVector& v) : v_(v) { v_.missing.fill(true); }
  void set(FactorId id, std::optional<double> value) {
    if (value && std::isfinite(*value)) {
      v_.values[column(id)] = *value;
      v_.missing[column(id)] = false;
    }
  }
  void set(FactorId id, double value) { set(id, std::optional<double>(value)); }

 private:
  FactorVector& v_;
};

FactorId offset(FactorId base, int k) { return static_cast<FactorId>(static_cast<int>(base) + k); }

}  // namespace

std::string_view factor_name(FactorId id) { return kNames[column(id)]; }
std::string_view factor_name(std::size_t col) { return kNames.at(col); }

std::size_t FactorVector::missing_count() const {
  return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), true));
}

std::vector<double> ema(std::span<const double> series, int n) {
  if (series.empty()) throw ArgumentError("factors", "ema of an empty series");
  if (n < 1) throw ArgumentError("factors", "ema window must be >= 1");
  const double k = 2.0 / (static_cast<double>(n) + 1.0);
  std::vector<double> out(series.size());
  out[0] = series[0];
  for (std::size_t t = 1; t < series.size(); ++t) out[t] = out[t - 1] + k * (series[t] - out[t - 1]);
  return out;
}

MacdIndicators macd_indicators(std::span<const double> closes) {
  if (closes.size() < static_cast<std::size_t>(kMacdMinObservations)) {
    throw ArgumentError("factors", fmt::format("MACD needs >= {} observations, got {}",
                                               kMacdMinObservations, closes.size()));
  }
  const auto fast = ema(closes, 12);
  const auto slow = ema(closes, 26);
  std::vector<double> dif(closes.size());
  for (std::size_t t = 0; t < closes.size(); ++t) dif[t] = fast[t] - slow[t];
  const auto dea = ema(dif, 9);
  MacdIndicators out;
  out.dif = dif.back();
  out.dea = dea.back();
  out.macd = 2.0 * (out.dif - out.dea);
  return out;
}

double rolling_beta(std::span<const double> stock_returns, std::span<const double> benchmark_returns) {
  if (stock_returns.size() != benchmark_returns.size()) {
    throw ArgumentError("factors", "beta inputs differ in length");
  }
  const std::size_t n = stock_returns.size();
  if (n < 60) throw ArgumentError("factors", "beta needs >= 60 observations");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += benchmark_returns[i];
    my += stock_returns[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = benchmark_returns[i] - mx;
    sxx += dx * dx;
    sxy += dx * (stock_returns[i] - my);
  }
  if (!(sxx > 0.0)) throw DegenerateInputError("factors", "benchmark returns have zero variance");
  return sxy / sxx;
}

FactorVector compute_raw_factors(const MarketDataset& dataset, std::string_view stock, Date date) {
  const auto s = dataset.stock_index(stock);
  if (!s) throw LookupError("factors", fmt::format("unknown stock {}", stock));
  const auto d = dataset.calendar().index_of(date);
  if (!d) throw LookupError("factors", fmt::format("{} is not a trading date", date.to_string()));
  return compute_raw_factors(dataset, *s, *d);
}

FactorVector compute_raw_factors(const MarketDataset& dataset, std::size_t stock, std::size_t day) {
  const auto& cal = dataset.calendar();
  FactorVector v;
  v.stock_id = dataset.stocks()[stock];
  v.date = cal[day];
  Builder b(v);

  const auto listing = dataset.first_bar_day(stock);
  if (!listing || *listing > day) return v;
  const std::size_t first = *listing;

  // Latest bar at or before the day supplies price and capitalization.
  const TradeBar* latest = nullptr;
  for (std::size_t j = day + 1; j-- > first;) {
    const TradeBar* bar = dataset.bar(stock, j);
    if (bar != nullptr && bar->close > 0.0 && bar->market_cap > 0.0) {
      latest = bar;
      break;
    }
  }
  const std::optional<double> close = latest ? std::optional(latest->close) : std::nullopt;
  const std::optional<double> mcap = latest ? std::optional(latest->market_cap) : std::nullopt;

  if (close) b.set(FactorId::LN_PRICE, std::log(*close));
  if (mcap) b.set(FactorId::LN_MCAP, std::log(*mcap));

  if (const FundamentalSnapshot* f = dataset.fundamentals_as_of(stock, cal[day])) {
    if (mcap) {
      b.set(FactorId::EP, ratio(f->net_profit, *mcap));
      b.set(FactorId::EP_CUT, ratio(f->net_profit - f->non_recurring_gain_loss, *mcap));
      b.set(FactorId::BP, ratio(f->net_assets, *mcap));
      b.set(FactorId::SP, ratio(f->operating_revenue, *mcap));
      b.set(FactorId::NCFP, ratio(f->net_cash_flow, *mcap));
      b.set(FactorId::OCFP, ratio(f->net_operate_cash_flow, *mcap));
      // growth / PE with PE = mcap / net_profit
      b.set(FactorId::G_PE, ratio(f->net_profit_growth * f->net_profit, *mcap));
    }
    b.set(FactorId::ROE, ratio(f->net_profit, f->equity));
    b.set(FactorId::ROA, ratio(f->net_profit, f->avg_total_assets));
    b.set(FactorId::GROSS_MARGIN, ratio(f->gross_profit, f->operating_revenue));
    b.set(FactorId::PROFIT_MARGIN, ratio(f->net_profit, f->operating_revenue));
    b.set(FactorId::ASSET_TURNOVER, ratio(f->operating_revenue, f->avg_total_assets));
    b.set(FactorId::OP_CASHFLOW_RATIO, ratio(f->net_operate_cash_flow, f->operate_income));
    b.set(FactorId::FIN_LEVERAGE, ratio(f->total_assets, f->net_assets));
    b.set(FactorId::DEBT_EQUITY, ratio(f->long_term_debt, f->net_assets));
    b.set(FactorId::CASH_RATIO, ratio(f->cash, f->current_liabilities));
    b.set(FactorId::CURRENT_RATIO, ratio(f->current_assets, f->current_liabilities));
  }

  // Daily return and turnover over the whole usable history; untraded days count as 0.
  const std::size_t history = day - first + 1;
  const std::size_t span = std::min<std::size_t>(history, kTwoYearWindowDays);
  std::vector<double> ret(span, 0.0), turnover(span, 0.0);  // index 0 = `day`, going back
  for (std::size_t x = 0; x < span; ++x) {
    const TradeBar* bar = dataset.bar(stock, day - x);
    if (bar != nullptr && !bar->is_suspended && bar->prev_close > 0.0) {
      ret[x] = bar->close / bar->prev_close - 1.0;
      turnover[x] = bar->turnover_ratio;
    }
  }
  const auto mean_of = [&](const std::vector<double>& s, std::size_t n) {
    double acc = 0.0;
    for (std::size_t x = 0; x < n; ++x) acc += s[x];
    return acc / static_cast<double>(n);
  };

  for (int k = 0; k < 4; ++k) {
    const int months = kMonths[k];
    const auto window = static_cast<std::size_t>(months * kTradingDaysPerMonth);

    if (latest != nullptr && day >= window && day - window >= first) {
      if (const auto past = dataset.last_close(stock, day - window)) {
        b.set(offset(FactorId::RET_1M, k), latest->close / *past - 1.0);
      }
    }
    if (history < window) continue;

    double prod = 0.0, decayed = 0.0;
    for (std::size_t x = 0; x < window; ++x) {
      const double p = ret[x] * turnover[x];
      prod += p;
      decayed += p * std::exp(-static_cast<double>(x) / (static_cast<double>(months) * 4.0));
    }
    b.set(offset(FactorId::RETTO_MEAN_1M, k), prod / static_cast<double>(window));
    b.set(offset(FactorId::RETTO_DECAY_1M, k), decayed / static_cast<double>(window));

    const double mu = mean_of(ret, window);
    double var = 0.0;
    for (std::size_t x = 0; x < window; ++x) var += (ret[x] - mu) * (ret[x] - mu);
    b.set(offset(FactorId::RET_STD_1M, k), std::sqrt(var / static_cast<double>(window)));

    const double to_mean = mean_of(turnover, window);
    b.set(offset(FactorId::TO_1M_MINUS1, k), to_mean - 1.0);
    if (history >= static_cast<std::size_t>(kTwoYearWindowDays)) {
      const double two_year = mean_of(turnover, kTwoYearWindowDays);
      if (const auto r = ratio(to_mean, two_year)) b.set(offset(FactorId::TO_REL2Y_1M, k), *r - 1.0);
    }
  }

  if (history >= static_cast<std::size_t>(kBetaWindowDays) && day >= static_cast<std::size_t>(kBetaWindowDays)) {
    std::vector<double> sr(kBetaWindowDays), br(kBetaWindowDays);
    for (std::size_t x = 0; x < static_cast<std::size_t>(kBetaWindowDays); ++x) {
      sr[x] = ret[x];
      br[x] = dataset.benchmark_close(day - x) / dataset.benchmark_close(day - x - 1) - 1.0;
    }
    try {
      b.set(FactorId::BETA, rolling_beta(sr, br));
    } catch (const DegenerateInputError&) {
    }
  }

  const std::size_t macd_span = std::min<std::size_t>(history, kMacdWindowDays);
  if (macd_span >= static_cast<std::size_t>(kMacdMinObservations)) {
    std::vector<double> closes;
    closes.reserve(macd_span);
    for (std::size_t j = day + 1 - macd_span; j <= day; ++j) {
      if (const auto c = dataset.last_close(stock, j)) closes.push_back(*c);
    }
    if (closes.size() >= static_cast<std::size_t>(kMacdMinObservations)) {
      const auto m = macd_indicators(closes);
      b.set(FactorId::MACD, m.macd);
      b.set(FactorId::DEA, m.dea);
      b.set(FactorId::DIF, m.dif);
    }
  }
  return v;
}

std::size_t FactorPanel::find(std::string_view stock) const {
  const auto it = std::lower_bound(stocks.begin(), stocks.end(), stock);
  if (it == stocks.end() || *it != stock) return npos;
  return static_cast<std::size_t>(it - stocks.begin());
}

FactorPanel build_panel(const MarketDataset& dataset, std::span<const StockId> universe, Date date) {
  const auto day = dataset.calendar().index_of(date);
  if (!day) throw LookupError("factors", fmt::format("{} is not a trading date", date.to_string()));
  std::vector<StockId> ids(universe.begin(), universe.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  FactorPanel panel;
  panel.date = date;
  panel.matrix = DenseMatrix(0, kFactorCount);
  for (const auto& id : ids) {
    const auto s = dataset.stock_index(id);
    if (!s) throw LookupError("factors", fmt::format("unknown stock {}", id));
    const auto v = compute_raw_factors(dataset, *s, *day);
    if (v.missing_count() > kMaxMissingFactors) continue;
    panel.stocks.push_back(id);
    panel.matrix.append_row(v.values);
    for (bool m : v.missing) panel.missing.push_back(m ? 1 : 0);
  }
  return panel;
}

NormalizationStats fit_normalization(const FactorPanel& raw) {
  NormalizationStats st;
  const std::size_t n = raw.size();
  std::vector<double> col;
  col.reserve(n);
  for (std::size_t c = 0; c < kFactorCount; ++c) {
    col.clear();
    for (std::size_t r = 0; r < n; ++r) {
      if (!raw.is_missing(r, c)) col.push_back(raw.matrix(r, c));
    }
    double median = 0.0;
    if (!col.empty()) {
      std::sort(col.begin(), col.end());
      const std::size_t h = col.size() / 2;
      median = col.size() % 2 ? col[h] : 0.5 * (col[h - 1] + col[h]);
    }
    st.median[c] = median;

    col.clear();
    for (std::size_t r = 0; r < n; ++r) col.push_back(raw.is_missing(r, c) ? median : raw.matrix(r, c));
    if (col.empty()) {
      st.constant[c] = true;
      continue;
    }
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    double mean = 0.0;
    for (double x : col) mean += x;
    mean /= static_cast<double>(col.size());
    double var = 0.0;
    for (double x : col) var += (x - mean) * (x - mean);
    double sd = std::sqrt(var / static_cast<double>(col.size()));
    st.lower[c] = mean - 5.0 * sd;
    st.upper[c] = mean + 5.0 * sd;

    for (double& x : col) x = std::clamp(x, st.lower[c], st.upper[c]);
    mean = 0.0;
    for (double x : col) mean += x;
    mean /= static_cast<double>(col.size());
    var = 0.0;
    for (double x : col) var += (x - mean) * (x - mean);
    sd = std::sqrt(var / static_cast<double>(col.size()));
    st.mean[c] = mean;
    st.stddev[c] = sd;
    const double scale = std::max(std::abs(*lo), std::abs(*hi));
    st.constant[c] = *lo == *hi || !(sd > 1e-12 * scale);
  }
  return st;
}

FactorPanel apply_normalization(const FactorPanel& raw, const NormalizationStats& stats) {
  FactorPanel out = raw;
  for (std::size_t r = 0; r < raw.size(); ++r) {
    for (std::size_t c = 0; c < kFactorCount; ++c) {
      if (stats.constant[c]) {
        out.matrix(r, c) = 0.0;
        continue;
      }
      double x = raw.is_missing(r, c) ? stats.median[c] : raw.matrix(r, c);
      x = std::clamp(x, stats.lower[c], stats.upper[c]);
      out.matrix(r, c) = (x - stats.mean[c]) / stats.stddev[c];
    }
  }
  out.normalized = true;
  out.stats = stats;
  return out;
}

FactorPanel normalize_panel(const FactorPanel& raw) {
  return apply_normalization(raw, fit_normalization(raw));
}

FactorPanel stack_panels(std::span<const FactorPanel> panels) {
  FactorPanel out;
  out.matrix = DenseMatrix(0, kFactorCount);
  for (const auto& p : panels) {
    out.date = p.date;
    out.stocks.insert(out.stocks.end(), p.stocks.begin(), p.stocks.end());
    for (std::size_t r = 0; r < p.size(); ++r) out.matrix.append_row(p.matrix.row(r));
    out.missing.insert(out.missing.end(), p.missing.begin(), p.missing.end());
  }
  return out;
}

}  // namespace deeprank
