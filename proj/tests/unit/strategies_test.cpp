#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "deeprank/error.hpp"
#include "deeprank/rng.hpp"
#include "deeprank/strategies.hpp"
#include "deeprank/synthetic.hpp"
#include "test_support.hpp"

namespace deeprank {
namespace {

using testing::make_bar;
using testing::make_fundamentals;

TradingCalendar weekday_calendar(Date first, Date last) {
  std::vector<Date> dates;
  for (Date d = first; d <= last; d = d + 1) {
    if (!d.is_weekend()) dates.push_back(d);
  }
  return TradingCalendar(std::move(dates));
}

TEST(TrainingWindowTest, ThreeActionDaysBeforeJuneEnd) {
  const auto cal = weekday_calendar(Date::from_ymd(2015, 1, 1), Date::from_ymd(2015, 12, 31));
  const auto w = build_window(cal, Date::from_ymd(2015, 6, 30), 3);
  const std::vector<Date> expected{Date::from_ymd(2015, 3, 31), Date::from_ymd(2015, 4, 30),
                                   Date::from_ymd(2015, 5, 29)};
  EXPECT_EQ(w.training_days, expected);
  EXPECT_EQ(w.prediction_day, Date::from_ymd(2015, 6, 30));
  const auto next = build_window(cal, Date::from_ymd(2015, 7, 31), 3);
  const std::vector<Date> shifted{Date::from_ymd(2015, 4, 30), Date::from_ymd(2015, 5, 29),
                                  Date::from_ymd(2015, 6, 30)};
  EXPECT_EQ(next.training_days, shifted);
}

TEST(TrainingWindowTest, InvalidRequestsAreWindowErrors) {
  const auto cal = weekday_calendar(Date::from_ymd(2015, 1, 1), Date::from_ymd(2015, 12, 31));
  EXPECT_THROW(build_window(cal, Date::from_ymd(2015, 6, 29), 3), WindowError);
  EXPECT_THROW(build_window(cal, Date::from_ymd(2015, 3, 31), 3), WindowError);
  EXPECT_NO_THROW(build_window(cal, Date::from_ymd(2015, 4, 30), 3));
  EXPECT_THROW(build_window(cal, Date::from_ymd(2015, 6, 30), 0), WindowError);
}

TEST(Labels, ExcessReturnOverTheBenchmark) {
  const Date d0 = Date::from_ymd(2015, 6, 30), d1 = Date::from_ymd(2015, 7, 1);
  std::vector<TradeBar> bars{make_bar("A", d0, 100, 100), make_bar("A", d1, 110, 100),
                             make_bar("B", d0, 50, 50), make_bar("B", d1, 50, 50, 0.01, 1e8, true)};
  const auto ds = MarketDataset::build(bars, {make_fundamentals("A", d0), make_fundamentals("B", d0)},
                                       {{d0, 1000.0}, {d1, 1020.0}});
  ASSERT_TRUE(excess_return_label(ds, 0, d0, d1).has_value());
  EXPECT_NEAR(*excess_return_label(ds, 0, d0, d1), 0.08, 1e-12);
  EXPECT_FALSE(excess_return_label(ds, 1, d0, d1).has_value());
  EXPECT_FALSE(excess_return_label(ds, 0, d0, Date::from_ymd(2015, 7, 4)).has_value());
}

class SmallMarketSets : public ::testing::Test {
 protected:
  void SetUp() override {
    ds_ = testing::random_market({.n_stocks = 5, .days = 320, .seed = 12});
    const auto& cal = ds_.calendar();
    action_ = cal[cal.month_end_indices().back()];
    window_ = build_window(cal, action_, 3);
  }
  MarketDataset ds_;
  Date action_;
  TrainingWindow window_;
};

TEST_F(SmallMarketSets, SampleCountsPerSetKind) {
  const auto& u = ds_.stocks();
  const auto reg = build_regression_set(ds_, window_, u);
  EXPECT_EQ(reg.size(), 15u);
  EXPECT_EQ(reg.inputs.cols(), kRegressionFactorCount);
  EXPECT_EQ(reg.industry.size(), 15u);
  const auto flat = build_projection_set(ds_, window_, u, false);
  EXPECT_EQ(flat.size(), 15u);
  EXPECT_EQ(flat.inputs.cols(), kFactorCount);
  const auto seq = build_projection_set(ds_, window_, u, true);
  EXPECT_EQ(seq.size(), 5u);
  ASSERT_EQ(seq.sequences.size(), 3u);
  for (const auto& m : seq.sequences) EXPECT_EQ(m.rows(), 5u);
  for (const auto& p : seq.provenance) EXPECT_EQ(p.date, window_.training_days.back());
}

TEST_F(SmallMarketSets, RegressionLabelIsLogMarketCap) {
  const auto reg = build_regression_set(ds_, window_, ds_.stocks());
  for (std::size_t i = 0; i < reg.size(); ++i) {
    const TradeBar* bar = ds_.bar(reg.provenance[i].stock_id, reg.provenance[i].date);
    ASSERT_NE(bar, nullptr);
    EXPECT_EQ(reg.labels[i], std::log(bar->market_cap));
  }
}

TEST_F(SmallMarketSets, FlatLabelsRunToTheNextActionDay) {
  const auto flat = build_projection_set(ds_, window_, ds_.stocks(), false);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const auto& p = flat.provenance[i];
    const auto it = std::find(window_.training_days.begin(), window_.training_days.end(), p.date);
    ASSERT_NE(it, window_.training_days.end());
    const Date to = it + 1 == window_.training_days.end() ? action_ : *(it + 1);
    EXPECT_EQ(flat.labels[i], *excess_return_label(ds_, *ds_.stock_index(p.stock_id), p.date, to));
  }
}

TEST_F(SmallMarketSets, SuspendedStockIsDroppedFromLabels) {
  auto bars = ds_.all_bars();
  for (auto& b : bars) {
    if (b.stock_id == ds_.stocks()[2] && b.date == action_) b.is_suspended = true;
  }
  const auto ds = MarketDataset::build(bars, ds_.all_fundamentals(), ds_.benchmark_series());
  const auto seq = build_projection_set(ds, window_, ds.stocks(), true);
  EXPECT_EQ(seq.size(), 4u);
  for (const auto& p : seq.provenance) EXPECT_NE(p.stock_id, ds.stocks()[2]);
  EXPECT_THROW(build_regression_set(ds, window_, std::vector<StockId>{}), StrategyError);
}

TEST(LinearValuation, RecoversAnExactLinearLaw) {
  Rng rng(14);
  TrainingSet set;
  set.inputs = DenseMatrix(0, kRegressionFactorCount);
  std::vector<double> beta(kRegressionFactorCount);
  for (double& b : beta) b = rng.normal();
  for (int r = 0; r < 200; ++r) {
    std::vector<double> row(kRegressionFactorCount);
    for (double& v : row) v = rng.normal();
    const int industry = 1 + r % 3;
    set.inputs.append_row(row);
    set.labels.push_back(20.0 + 0.5 * industry + std::inner_product(row.begin(), row.end(), beta.begin(), 0.0));
    set.industry.push_back(industry);
  }
  const auto m = LinearValuationModel::fit(set, true);
  EXPECT_EQ(m.industries, (std::vector<int>{1, 2, 3}));
  for (std::size_t r = 0; r < 10; ++r) {
    EXPECT_NEAR(m.predict(set.inputs.row(r), set.industry[r]), set.labels[r], 1e-6);
  }
  TrainingSet flat;
  flat.kind = TrainingSetKind::flat_projection;
  flat.labels = {1.0};
  EXPECT_THROW(LinearValuationModel::fit(flat, false), StrategyError);
}

TEST(Ranking, SortsByScoreThenId) {
  const auto r = make_ranking(Date::from_ymd(2015, 6, 30), {{"C", 1.0}, {"A", 2.0}, {"B", 1.0}});
  ASSERT_EQ(r.entries.size(), 3u);
  EXPECT_EQ(r.entries[0].stock_id, "A");
  EXPECT_EQ(r.entries[1].stock_id, "B");
  EXPECT_EQ(r.entries[2].stock_id, "C");
  EXPECT_THROW(make_ranking(r.date, {{"A", std::nan("")}}), StrategyError);
}

TEST(SelectTargets, TopKAtEqualWeight) {
  const auto r = make_ranking(Date::from_ymd(2015, 6, 30), {{"A", 5}, {"B", 4}, {"C", 3}, {"D", 2}, {"E", 1}});
  const auto top = select_targets(r, 3);
  EXPECT_EQ(top, (std::map<StockId, double>{{"A", 1.0 / 3}, {"B", 1.0 / 3}, {"C", 1.0 / 3}}));
  const auto wide = select_targets(r, 10);
  EXPECT_EQ(wide.size(), 5u);
  for (const auto& [id, w] : wide) EXPECT_EQ(w, 0.1);
  const auto tied = make_ranking(r.date, {{"B", 1}, {"A", 1}});
  EXPECT_EQ(select_targets(tied, 1).begin()->first, "A");
  EXPECT_THROW(select_targets(Ranking{r.date, {}}, 3), SelectionError);
  EXPECT_THROW(select_targets(r, 0), ConfigError);
}

TEST(Strategies, NamesRoundTrip) {
  for (auto k : {StrategyKind::linreg, StrategyKind::fcnn, StrategyKind::lstm}) {
    EXPECT_EQ(parse_strategy(strategy_name(k)), k);
  }
  EXPECT_THROW(parse_strategy("svm"), ConfigError);
}

TEST(Strategies, DaySeedsDependOnMasterAndDate) {
  const Date d = Date::from_ymd(2015, 6, 30);
  const auto a = day_seeds(1, d);
  EXPECT_NE(a.init, a.shuffle);
  EXPECT_NE(a.init, day_seeds(2, d).init);
  EXPECT_NE(a.init, day_seeds(1, Date::from_ymd(2015, 7, 31)).init);
  EXPECT_EQ(a.init, day_seeds(1, d).init);
}

StrategyOptions quick_options() {
  StrategyOptions o;
  o.train.epochs = 3;
  o.train.seed = 5;
  return o;
}

class SyntheticStrategies : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    market_ = new SyntheticMarket(generate_synthetic_market_detailed(testing::small_synthetic(41, 60)));
  }
  static void TearDownTestSuite() {
    delete market_;
    market_ = nullptr;
  }
  static Date action_day() { return market_->month_ends[market_->month_ends.size() - 5]; }
  static SyntheticMarket* market_;
};
SyntheticMarket* SyntheticStrategies::market_ = nullptr;

TEST_F(SyntheticStrategies, RankingsIgnoreDataAfterTheActionDay) {
  const auto& ds = market_->dataset;
  const Date d = action_day();
  const auto mutated = testing::mutate_after(ds, d, 99);
  const auto universe = eligible_universe(ds, d);
  ASSERT_EQ(universe, eligible_universe(mutated, d));
  for (auto k : {StrategyKind::linreg, StrategyKind::fcnn, StrategyKind::lstm}) {
    const auto a = rank_stocks(k, ds, d, universe, quick_options());
    const auto b = rank_stocks(k, mutated, d, universe, quick_options());
    ASSERT_EQ(a.entries.size(), b.entries.size()) << strategy_name(k);
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      EXPECT_EQ(a.entries[i].stock_id, b.entries[i].stock_id);
      EXPECT_EQ(a.entries[i].score, b.entries[i].score);
    }
  }
}

TEST_F(SyntheticStrategies, SameInputsSameRanking) {
  const auto& ds = market_->dataset;
  const Date d = action_day();
  const auto universe = eligible_universe(ds, d);
  FactorCache cache(ds);
  for (auto k : {StrategyKind::fcnn, StrategyKind::lstm}) {
    const auto a = rank_stocks(k, ds, d, universe, quick_options());
    const auto b = rank_stocks(k, ds, d, universe, quick_options(), &cache);
    ASSERT_EQ(a.entries.size(), universe.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
      EXPECT_EQ(a.entries[i].stock_id, b.entries[i].stock_id);
      EXPECT_EQ(a.entries[i].score, b.entries[i].score);
    }
  }
}

TEST_F(SyntheticStrategies, TooShortHistoryIsAStrategyError) {
  const auto& ds = market_->dataset;
  const Date early = market_->month_ends[1];
  EXPECT_THROW(rank_stocks(StrategyKind::linreg, ds, early, ds.stocks(), quick_options()), StrategyError);
}

std::vector<double> ranks_of(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks_of(x), ry = ranks_of(y);
  const double mx = testing::oracle::mean(rx), my = testing::oracle::mean(ry);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Spearman correlation between a strategy's scores on month_ends[k] and the realized excess return to month_ends[k + 1].
double realized_spearman(StrategyKind kind, const SyntheticMarket& m, std::size_t k, const StrategyOptions& o) {
  const Date d = m.month_ends[k];
  const auto r = rank_stocks(kind, m.dataset, d, eligible_universe(m.dataset, d), o);
  std::vector<double> score, realized;
  for (const auto& e : r.entries) {
    const auto x = excess_return_label(m.dataset, *m.dataset.stock_index(e.stock_id), d, m.month_ends[k + 1]);
    if (!x) continue;
    score.push_back(e.score);
    realized.push_back(*x);
  }
  return spearman(score, realized);
}

TEST(PlantedSignal, ProjectorsRankNextMonthWinnersFirst) {
  auto c = testing::small_synthetic(43, 300);
  c.planted_signal_strength = 1.0;
  const auto m = generate_synthetic_market_detailed(c);
  const std::size_t k = m.month_ends.size() - 4;
  StrategyOptions o;
  o.train.seed = 7;
  for (auto kind : {StrategyKind::fcnn, StrategyKind::lstm}) {
    const double rho = realized_spearman(kind, m, k, o);
    EXPECT_GT(rho, 0.5) << strategy_name(kind);
  }
}

TEST(PlantedSignal, NoSignalNoRankCorrelation) {
  std::vector<double> rhos;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto c = testing::small_synthetic(200 + seed, 100);
    c.planted_signal_strength = 0.0;
    const auto m = generate_synthetic_market_detailed(c);
    StrategyOptions o;
    o.train.seed = seed;
    rhos.push_back(std::abs(realized_spearman(StrategyKind::fcnn, m, m.month_ends.size() - 4, o)));
  }
  std::nth_element(rhos.begin(), rhos.begin() + 5, rhos.end());
  EXPECT_LT(rhos[5], 0.2);
}

/// Market cap of one stock scaled by exp(-delta) on a single day.
MarketDataset cheapen(const MarketDataset& ds, const StockId& id, Date day, double delta) {
  auto bars = ds.all_bars();
  for (auto& b : bars) {
    if (b.stock_id == id && b.date == day) b.market_cap *= std::exp(-delta);
  }
  return MarketDataset::build(bars, ds.all_fundamentals(), ds.benchmark_series());
}

TEST(PlantedUndervaluation, CheapenedStockRanksFirst) {
  const auto m = generate_synthetic_market_detailed(testing::small_synthetic(44, 120));
  const Date d = m.month_ends[m.month_ends.size() - 3];
  const auto universe = eligible_universe(m.dataset, d);
  const auto before = rank_linear_regression(m.dataset, d, universe, StrategyOptions{});
  const StockId target = before.entries[before.entries.size() / 2].stock_id;
  const double delta = 1.0;
  const auto after = rank_linear_regression(cheapen(m.dataset, target, d, delta), d, universe, StrategyOptions{});
  ASSERT_EQ(after.entries.front().stock_id, target);
  const auto score_of = [&](const Ranking& r) {
    for (const auto& e : r.entries) {
      if (e.stock_id == target) return e.score;
    }
    return std::nan("");
  };
  // Valuation ratios such as EP and BP move with the cap too, so part of the cut is explained away.
  EXPECT_GT(score_of(after) - score_of(before), 0.0);
  EXPECT_LT(score_of(after) - score_of(before), delta);
}

TEST(PlantedUndervaluation, FrozenWeightsShiftEpsilonByExactlyDelta) {
  const auto m = generate_synthetic_market_detailed(testing::small_synthetic(45, 80));
  const Date d = m.month_ends[m.month_ends.size() - 3];
  const auto universe = eligible_universe(m.dataset, d);
  const auto window = build_window(m.dataset.calendar(), d, 3);
  const auto model = LinearValuationModel::fit(build_regression_set(m.dataset, window, universe), false);
  const auto panel = normalize_panel(build_panel(m.dataset, universe, d));
  const double delta = 0.7;
  std::vector<double> row;
  for (std::size_t r = 0; r < panel.size(); ++r) {
    row.clear();
    for (std::size_t c = 0; c < kFactorCount; ++c) {
      if (c != column(FactorId::LN_MCAP)) row.push_back(panel.matrix(r, c));
    }
    const double actual = std::log(m.dataset.bar(panel.stocks[r], d)->market_cap);
    const double eps = model.predict(row, 0) - actual;
    EXPECT_NEAR(model.predict(row, 0) - (actual - delta) - eps, delta, 1e-12);
  }
}

TEST(TrainingWindowTest, ConsecutiveWindowsShareAllButOneDay) {
  const auto cal = weekday_calendar(Date::from_ymd(2014, 1, 1), Date::from_ymd(2015, 12, 31));
  for (int w : {1, 3, 6}) {
    const auto& ends = cal.month_end_indices();
    for (std::size_t i = static_cast<std::size_t>(w); i + 1 < ends.size(); ++i) {
      const auto a = build_window(cal, cal[ends[i]], w), b = build_window(cal, cal[ends[i + 1]], w);
      std::vector<Date> shared;
      std::set_intersection(a.training_days.begin(), a.training_days.end(), b.training_days.begin(),
                            b.training_days.end(), std::back_inserter(shared));
      EXPECT_EQ(shared.size(), static_cast<std::size_t>(w - 1));
    }
  }
}

}  // namespace
}  // namespace deeprank
