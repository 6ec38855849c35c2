#include <cmath>

#include <gtest/gtest.h>
#include <json.hpp>

#include "deeprank/error.hpp"
#include "deeprank/metrics.hpp"
#include "deeprank/rng.hpp"
#include "test_support.hpp"

namespace deeprank {
namespace {

ReturnSeries series(Date first, std::vector<double> returns) {
  const auto dates = testing::weekdays(first, returns.size());
  return ReturnSeries(dates, std::move(returns));
}

std::vector<double> noise(std::size_t n, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal(0.0003, sd);
  return v;
}

TEST(ReturnSeriesTest, CumulativeCompounds) {
  const auto s = series(Date::from_ymd(2015, 1, 1), {0.1, -0.1, 0.05});
  EXPECT_NEAR(s.cumulative()[1], 1.1 * 0.9 - 1, 1e-15);
  EXPECT_NEAR(s.total_return(), 1.1 * 0.9 * 1.05 - 1, 1e-15);
  EXPECT_THROW(ReturnSeries({Date::from_ymd(2015, 1, 1)}, {}), ArgumentError);
  EXPECT_THROW(ReturnSeries({Date::from_ymd(2015, 1, 1)}, {std::nan("")}), ArgumentError);
}

TEST(Sharpe, AnnualizedArithmetic) {
  EXPECT_NEAR(sharpe_from_annualized(0.10, 0.03, 0.20), 0.35, 1e-15);
  EXPECT_TRUE(std::isinf(sharpe_from_annualized(0.10, 0.03, 0.0)));
  EXPECT_TRUE(std::isnan(sharpe_from_annualized(0.03, 0.03, 0.0)));
}

TEST(Sharpe, UndefinedWhenPortfolioEqualsBenchmark) {
  const auto r = noise(60, 0.01, 1);
  const auto p = series(Date::from_ymd(2015, 1, 1), r), b = series(Date::from_ymd(2015, 1, 1), r);
  EXPECT_FALSE(std::isfinite(sharpe_ratio(p, b, 0.03)));
  EXPECT_EQ(similarity_to_benchmark(p, b), 0.0);
}

TEST(Sharpe, MatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pr = noise(130, 0.015, seed), br = noise(130, 0.01, seed + 10);
    const Date d0 = Date::from_ymd(2015, 1, 1);
    long double growth = 1, mean = 0, ss = 0;
    for (double x : pr) growth *= 1 + static_cast<long double>(x);
    for (std::size_t i = 0; i < pr.size(); ++i) mean += pr[i] - br[i];
    mean /= pr.size();
    for (std::size_t i = 0; i < pr.size(); ++i) ss += (pr[i] - br[i] - mean) * (pr[i] - br[i] - mean);
    const long double annual = std::pow(growth, 252.0L / pr.size()) - 1;
    const long double sigma = std::sqrt(ss / pr.size()) * std::sqrt(252.0L);
    const double expected = static_cast<double>((annual - 0.02L) / sigma);
    EXPECT_NEAR(sharpe_ratio(series(d0, pr), series(d0, br), 0.02), expected, 1e-9);
  }
}

TEST(Sharpe, ShortOrUnequalSeriesAreArgumentErrors) {
  const Date d0 = Date::from_ymd(2015, 1, 1);
  EXPECT_THROW(sharpe_ratio(series(d0, {0.1}), series(d0, {0.1}), 0), ArgumentError);
  EXPECT_THROW(sharpe_ratio(series(d0, {0.1, 0.2}), series(d0, {0.1, 0.2, 0.3}), 0), ArgumentError);
  EXPECT_THROW(similarity_to_benchmark(series(d0, {0.1}), series(d0, {0.1})), ArgumentError);
}

TEST(Similarity, MatchesBruteForceOnBothBases) {
  const Date d0 = Date::from_ymd(2015, 1, 1);
  const auto pr = noise(90, 0.02, 3), br = noise(90, 0.01, 4);
  const auto p = series(d0, pr), b = series(d0, br);
  std::vector<double> daily, cumulative;
  double gp = 1, gb = 1;
  for (std::size_t i = 0; i < pr.size(); ++i) {
    daily.push_back(pr[i] - br[i]);
    gp *= 1 + pr[i];
    gb *= 1 + br[i];
    cumulative.push_back(gp - gb);
  }
  EXPECT_NEAR(similarity_to_benchmark(p, b, SimilarityBasis::daily), testing::oracle::population_std(daily), 1e-12);
  EXPECT_NEAR(similarity_to_benchmark(p, b), testing::oracle::population_std(cumulative), 1e-12);
}

TEST(Similarity, SymmetricAndOffsetInvariantOnDailyBasis) {
  const Date d0 = Date::from_ymd(2015, 1, 1);
  const auto pr = noise(50, 0.02, 5), br = noise(50, 0.01, 6);
  const auto p = series(d0, pr), b = series(d0, br);
  EXPECT_EQ(similarity_to_benchmark(p, b), similarity_to_benchmark(b, p));
  auto shifted = pr;
  for (double& x : shifted) x += 0.001;
  EXPECT_NEAR(similarity_to_benchmark(series(d0, shifted), b, SimilarityBasis::daily),
              similarity_to_benchmark(p, b, SimilarityBasis::daily), 1e-12);
}

TEST(Monthly, ZeroReturnsGiveZeroRows) {
  const auto z = series(Date::from_ymd(2015, 6, 1), std::vector<double>(30, 0.0));
  const auto rows = monthly_breakdown(z, z, 0.0);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].month, "2015-06");
  EXPECT_EQ(rows[1].month, "2015-07");
  for (const auto& r : rows) {
    EXPECT_EQ(r.portfolio_return, 0.0);
    EXPECT_EQ(r.benchmark_return, 0.0);
  }
}

TEST(Monthly, CompoundsDailyReturnsWithinEachMonth) {
  const std::size_t n = 22;  // weekdays of June 2015
  const double daily = std::pow(0.92, 1.0 / n) - 1.0;
  const auto p = series(Date::from_ymd(2015, 6, 1), std::vector<double>(n, daily));
  const auto b = series(Date::from_ymd(2015, 6, 1), std::vector<double>(n, 0.0));
  const auto rows = monthly_breakdown(p, b, 0.0);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].portfolio_return, -0.08, 1e-12);
  EXPECT_TRUE(std::isinf(rows[0].sharpe));
  EXPECT_LT(rows[0].sharpe, 0.0);
}

TEST(Report, AllCashPortfolio) {
  const Date d0 = Date::from_ymd(2015, 6, 1);
  const auto p = series(d0, std::vector<double>(40, 0.0));
  const auto b = series(d0, noise(40, 0.01, 7));
  const auto r = build_report("cash", p, b, 0.0);
  EXPECT_EQ(r.net_return, 0.0);
  EXPECT_EQ(r.sharpe_ratio, 0.0);
  EXPECT_NEAR(r.benchmark_return, b.total_return(), 0);
  EXPECT_EQ(r.monthly.size(), 2u);
}

TEST(Report, JsonFieldsAndDeterminism) {
  const Date d0 = Date::from_ymd(2015, 6, 1);
  const auto p = series(d0, noise(45, 0.02, 8)), b = series(d0, noise(45, 0.01, 9));
  const auto text = report_json(build_report("lstm", p, b, 0.03));
  EXPECT_EQ(text, report_json(build_report("lstm", p, b, 0.03)));
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j.at("strategy"), "lstm");
  for (const char* key : {"sharpe_ratio", "net_return", "benchmark_return", "similarity", "risk_free_annual"}) {
    EXPECT_TRUE(j.at(key).is_number()) << key;
  }
  EXPECT_EQ(j.at("monthly").size(), 2u);
  EXPECT_EQ(j.at("monthly")[0].at("month"), "2015-06");
  EXPECT_NEAR(j.at("net_return").get<double>(), p.total_return(), 0);

  const auto same = series(d0, noise(45, 0.02, 8));
  const auto undefined = nlohmann::json::parse(report_json(build_report("x", same, same, 0.0)));
  EXPECT_EQ(undefined.at("sharpe_ratio"), "undefined");
}

}  // namespace
}  // namespace deeprank
