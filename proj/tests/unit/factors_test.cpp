#include <set>

#include <gtest/gtest.h>

#include "deeprank/error.hpp"
#include "deeprank/factors.hpp"
#include "deeprank/rng.hpp"
#include "test_support.hpp"

namespace deeprank {
namespace {

using testing::make_bar;
using testing::make_fundamentals;
using testing::weekdays;

TEST(Ema, ConstantSeriesIsAFixedPoint) {
  const std::vector<double> x{5, 5, 5};
  EXPECT_EQ(ema(x, 4), x);
}

TEST(Ema, HandRecurrenceWithWindowTwo) {
  const auto e = ema(std::vector<double>{1, 2, 3}, 2);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_NEAR(e[0], 1.0, 1e-4);
  EXPECT_NEAR(e[1], 1.6667, 1e-4);
  EXPECT_NEAR(e[2], 2.5556, 1e-4);
}

TEST(Ema, WindowOneIsIdentity) {
  const std::vector<double> x{3, -1, 4, 1, -5};
  EXPECT_EQ(ema(x, 1), x);
}

TEST(Ema, EmptySeriesIsAnArgumentError) {
  EXPECT_THROW(ema(std::vector<double>{}, 3), ArgumentError);
}

TEST(Ema, CommutesWithAffineMaps) {
  Rng rng(2);
  std::vector<double> x(300);
  for (double& v : x) v = rng.normal(0, 5);
  for (int n : {1, 5, 12, 26}) {
    const double a = rng.uniform(-3, 3), b = rng.uniform(-10, 10);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
    const auto ex = ema(x, n), ey = ema(y, n);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(ey[i], a * ex[i] + b, 1e-12 * (1 + std::abs(ey[i])));
  }
}

TEST(Macd, ConstantPricesGiveZeros) {
  const auto m = macd_indicators(std::vector<double>(60, 42.0));
  EXPECT_EQ(m.dif, 0.0);
  EXPECT_EQ(m.dea, 0.0);
  EXPECT_EQ(m.macd, 0.0);
}

TEST(Macd, RisingPricesGivePositiveDif) {
  std::vector<double> x(80);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 10.0 + 0.5 * static_cast<double>(i);
  EXPECT_GT(macd_indicators(x).dif, 0.0);
}

TEST(Macd, MatchesHandRecurrences) {
  Rng rng(4);
  std::vector<double> x(120);
  double p = 20;
  for (double& v : x) v = p *= std::exp(rng.normal(0, 0.02));
  const auto run = [](const std::vector<double>& s, int n) {
    const double k = 2.0 / (n + 1);
    double e = s[0];
    std::vector<double> out{e};
    for (std::size_t i = 1; i < s.size(); ++i) out.push_back(e = e + k * (s[i] - e));
    return out;
  };
  const auto fast = run(x, 12), slow = run(x, 26);
  std::vector<double> dif(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dif[i] = fast[i] - slow[i];
  const double dea = run(dif, 9).back();
  const auto m = macd_indicators(x);
  EXPECT_NEAR(m.dif, dif.back(), 1e-12);
  EXPECT_NEAR(m.dea, dea, 1e-12);
  EXPECT_NEAR(m.macd, 2 * (dif.back() - dea), 1e-12);
}

TEST(Macd, ShortSeriesIsAnArgumentError) {
  EXPECT_THROW(macd_indicators(std::vector<double>(10, 1.0)), ArgumentError);
}

TEST(Beta, ExactlyTwiceTheBenchmark) {
  Rng rng(6);
  std::vector<double> b(252), s(252);
  for (std::size_t i = 0; i < b.size(); ++i) s[i] = 2.0 * (b[i] = rng.normal(0, 0.01));
  EXPECT_NEAR(rolling_beta(s, b), 2.0, 1e-12);
}

TEST(Beta, IndependentNoiseHasSmallBeta) {
  Rng rng(7);
  std::vector<double> b(10000), s(10000);
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = rng.normal(0, 0.01);
    s[i] = rng.normal(0, 0.01);
  }
  EXPECT_LT(std::abs(rolling_beta(s, b)), 0.1);
}

TEST(Beta, FlatBenchmarkIsDegenerate) {
  EXPECT_THROW(rolling_beta(std::vector<double>(100, 0.01), std::vector<double>(100, 0.0)), DegenerateInputError);
  EXPECT_THROW(rolling_beta(std::vector<double>(10, 0.01), std::vector<double>(10, 0.0)), ArgumentError);
}

TEST(FactorIds, FortySevenDistinctNames) {
  std::set<std::string_view> names;
  for (std::size_t c = 0; c < kFactorCount; ++c) names.insert(factor_name(c));
  EXPECT_EQ(names.size(), kFactorCount);
  EXPECT_EQ(factor_name(FactorId::EP), "EP");
  EXPECT_EQ(factor_name(FactorId::DIF), "DIF");
  EXPECT_EQ(appendix_row(FactorId::EP), 1);
  EXPECT_EQ(appendix_row(FactorId::LN_MCAP), 19);
  EXPECT_EQ(appendix_row(FactorId::DIF), 47);
}

/// One stock compounding at a constant daily return with constant turnover.
class SteadyStock : public ::testing::Test {
 protected:
  static constexpr double r = 0.001;
  static constexpr double u = 0.02;
  void SetUp() override {
    dates_ = weekdays(Date::from_ymd(2013, 1, 1), 600);
    std::vector<PricePoint> bench;
    std::vector<TradeBar> bars;
    double close = 100.0, level = 1000.0;
    Rng rng(1);
    for (std::size_t i = 0; i < dates_.size(); ++i) {
      const double prev = close;
      if (i > 0) {
        close = prev * (1.0 + r);
        level *= 1.0 + rng.normal(0, 0.01);
      }
      bench.push_back({dates_[i], level});
      bars.push_back(make_bar("S", dates_[i], close, prev, u, 10.0));
    }
    auto f = make_fundamentals("S", dates_[0]);
    f.net_profit = 100.0;
    ds_ = MarketDataset::build(bars, {f}, bench);
  }
  MarketDataset ds_;
  std::vector<Date> dates_;
};

TEST_F(SteadyStock, PriceAndValuationRatios) {
  const auto v = compute_raw_factors(ds_, "S", dates_.back());
  const TradeBar* bar = ds_.bar("S", dates_.back());
  EXPECT_NEAR(v[FactorId::LN_PRICE], std::log(bar->close), 1e-12);
  EXPECT_NEAR(v[FactorId::EP], 100.0 / bar->market_cap, 1e-15);
  EXPECT_NEAR(v[FactorId::LN_MCAP], std::log(bar->market_cap), 1e-12);
  EXPECT_EQ(v.missing_count(), 0u);
}

TEST_F(SteadyStock, TurnoverWeightedReturnsHaveClosedForms) {
  const std::size_t day = dates_.size() - 1;
  const auto v = compute_raw_factors(ds_, 0, day);
  const double ru = (100.0 * (1 + r) / 100.0 - 1.0) * u;  // r·u as the library computes each day
  const int months[4] = {1, 3, 6, 12};
  for (int k = 0; k < 4; ++k) {
    const auto col = [&](FactorId base) { return static_cast<FactorId>(static_cast<int>(base) + k); };
    const int n = months[k] * kTradingDaysPerMonth;
    EXPECT_NEAR(v[col(FactorId::RETTO_MEAN_1M)], r * u, 1e-15);
    double w = 0.0;
    for (int x = 0; x < n; ++x) w += std::exp(-x / (months[k] * 4.0));
    EXPECT_NEAR(v[col(FactorId::RETTO_DECAY_1M)], ru * w / n, 1e-15);
    EXPECT_NEAR(v[col(FactorId::RET_STD_1M)], 0.0, 1e-15);
    EXPECT_NEAR(v[col(FactorId::TO_1M_MINUS1)], u - 1.0, 1e-15);
    EXPECT_NEAR(v[col(FactorId::TO_REL2Y_1M)], 0.0, 1e-12);
    EXPECT_NEAR(v[col(FactorId::RET_1M)], std::pow(1 + r, n) - 1.0, 1e-12);
  }
}

TEST_F(SteadyStock, MissingInputsAreMaskedNotFatal) {
  const auto early = compute_raw_factors(ds_, 0, 10);
  EXPECT_TRUE(early.is_missing(FactorId::RET_1M));
  EXPECT_TRUE(early.is_missing(FactorId::BETA));
  EXPECT_TRUE(early.is_missing(FactorId::MACD));
  EXPECT_FALSE(early.is_missing(FactorId::LN_PRICE));
}

class RandomPanel : public ::testing::Test {
 protected:
  void SetUp() override {
    ds_ = testing::random_market({.n_stocks = 12, .days = 560, .seed = 21});
    universe_ = ds_.stocks();
    date_ = ds_.calendar().dates().back();
  }
  MarketDataset ds_;
  std::vector<StockId> universe_;
  Date date_;
};

TEST_F(RandomPanel, ShapeOrderAndDeterminism) {
  std::vector<StockId> shuffled(universe_.rbegin(), universe_.rend());
  const auto p = build_panel(ds_, shuffled, date_);
  EXPECT_EQ(p.size(), universe_.size());
  EXPECT_EQ(p.matrix.rows(), universe_.size());
  EXPECT_EQ(p.matrix.cols(), kFactorCount);
  EXPECT_EQ(p.stocks, universe_);
  EXPECT_FALSE(p.normalized);
  const auto again = build_panel(ds_, universe_, date_);
  EXPECT_EQ(p.matrix, again.matrix);
  EXPECT_EQ(p.missing, again.missing);
  const std::vector<StockId> one{universe_[3]};
  const auto single = build_panel(ds_, one, date_);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single.matrix.cols(), kFactorCount);
}

TEST_F(RandomPanel, NormalizedColumnsAreStandardized) {
  const auto p = normalize_panel(build_panel(ds_, universe_, date_));
  EXPECT_TRUE(p.normalized);
  for (std::size_t c = 0; c < kFactorCount; ++c) {
    std::vector<double> col;
    for (std::size_t r = 0; r < p.size(); ++r) col.push_back(p.matrix(r, c));
    if (p.stats.constant[c]) {
      for (double v : col) EXPECT_EQ(v, 0.0);
      continue;
    }
    EXPECT_LE(std::abs(testing::oracle::mean(col)), 1e-9) << factor_name(c);
    EXPECT_LE(std::abs(testing::oracle::population_std(col) - 1.0), 1e-9) << factor_name(c);
  }
}

TEST_F(RandomPanel, FactorsIgnoreEverythingAfterTheDate) {
  const Date cutoff = ds_.calendar()[400];
  const auto mutated = testing::mutate_after(ds_, cutoff, 5);
  for (std::size_t s = 0; s < ds_.stock_count(); ++s) {
    const auto a = compute_raw_factors(ds_, s, 400);
    const auto b = compute_raw_factors(mutated, s, 400);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.missing, b.missing);
  }
}

TEST_F(RandomPanel, TrailingReturnsMatchPeriodReturn) {
  const std::size_t day = 500;
  const int months[4] = {1, 3, 6, 12};
  for (std::size_t s = 0; s < ds_.stock_count(); ++s) {
    const auto series = ds_.close_series(s);
    const auto v = compute_raw_factors(ds_, s, day);
    for (int k = 0; k < 4; ++k) {
      const std::size_t back = day - static_cast<std::size_t>(months[k] * kTradingDaysPerMonth);
      const double expected = period_return(series, ds_.calendar()[back], ds_.calendar()[day]);
      EXPECT_NEAR(v.values[column(FactorId::RET_1M) + static_cast<std::size_t>(k)], expected, 1e-12);
    }
  }
}

FactorPanel hand_panel(const std::vector<double>& first_column, const std::vector<bool>& missing) {
  FactorPanel p;
  const std::size_t n = first_column.size();
  p.matrix = DenseMatrix(n, kFactorCount, 7.0);
  p.missing.assign(n * kFactorCount, 0);
  for (std::size_t r = 0; r < n; ++r) {
    p.stocks.push_back("S" + std::to_string(r));
    p.matrix(r, 0) = first_column[r];
    p.missing[r * kFactorCount] = missing[r] ? 1 : 0;
  }
  return p;
}

TEST(Normalize, ThreeValueColumn) {
  const auto p = normalize_panel(hand_panel({1, 2, 3}, {false, false, false}));
  EXPECT_NEAR(p.matrix(0, 0), -1.2247, 1e-4);
  EXPECT_NEAR(p.matrix(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(p.matrix(2, 0), 1.2247, 1e-4);
  EXPECT_NEAR(p.stats.mean[0], 2.0, 1e-15);
  EXPECT_NEAR(p.stats.stddev[0], std::sqrt(2.0 / 3.0), 1e-15);
}

TEST(Normalize, ConstantColumnBecomesZeros) {
  const auto p = normalize_panel(hand_panel({1, 2, 3}, {false, false, false}));
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(p.matrix(r, 5), 0.0);
  EXPECT_TRUE(p.stats.constant[5]);
}

TEST(Normalize, MissingEntryTakesTheMedian) {
  const auto p = normalize_panel(hand_panel({1, 999, 3}, {false, true, false}));
  EXPECT_EQ(p.stats.median[0], 2.0);
  EXPECT_NEAR(p.matrix(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(p.matrix(2, 0), 1.2247, 1e-4);
}

TEST(Normalize, OutliersAreWinsorizedAtFiveSigma) {
  std::vector<double> col(200, 0.0);
  Rng rng(3);
  for (double& v : col) v = rng.normal();
  col[0] = 1e6;
  const auto p = normalize_panel(hand_panel(col, std::vector<bool>(col.size(), false)));
  EXPECT_EQ(p.stats.upper[0], p.stats.upper[0]);
  double mx = -1e300;
  for (std::size_t r = 0; r < col.size(); ++r) mx = std::max(mx, p.matrix(r, 0));
  EXPECT_EQ(mx, p.matrix(0, 0));
  EXPECT_LT(mx, 1e3);
}

TEST(Normalize, StackedPanelsKeepRowsInOrder) {
  const auto a = hand_panel({1, 2}, {false, false});
  const auto b = hand_panel({3}, {true});
  const std::vector<FactorPanel> both{a, b};
  const auto s = stack_panels(both);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.matrix(2, 0), 3.0);
  EXPECT_TRUE(s.is_missing(2, 0));
}

}  // namespace
}  // namespace deeprank
