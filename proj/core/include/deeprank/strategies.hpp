#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "deeprank/date.hpp"
#include "deeprank/factors.hpp"
#include "deeprank/lstm.hpp"
#include "deeprank/marketdata.hpp"
#include "deeprank/matrix.hpp"
#include "deeprank/mlp.hpp"
#include "deeprank/training.hpp"

namespace deeprank {

enum class StrategyKind { linreg, fcnn, lstm };

/// "linreg", "fcnn" or "lstm"; throws ConfigError otherwise.
StrategyKind parse_strategy(std::string_view name);
std::string_view strategy_name(StrategyKind kind);

/// The W action days before `action_day`; predictions are made on the action day itself.
struct TrainingWindow {
  Date action_day;
  std::vector<Date> training_days;  // ascending
  Date prediction_day;
};

/// Throws WindowError if `action_day` is not an action day or fewer than W precede it.
TrainingWindow build_window(const TradingCalendar& calendar, Date action_day, int window);

/// (close(t1)/close(t0) - 1) - (B(t1)/B(t0) - 1); empty when the stock lacks an unsuspended bar on either date.
std::optional<double> excess_return_label(const MarketDataset& dataset, std::size_t stock, Date t0, Date t1);

/// Memoized raw factor vectors keyed by (stock, day). Not thread-safe.
class FactorCache {
 public:
  explicit FactorCache(const MarketDataset& dataset) : dataset_(&dataset) {}

  const FactorVector& get(std::size_t stock, std::size_t day);
  /// Same rows and order as build_panel.
  FactorPanel panel(std::span<const StockId> universe, Date date);
  const MarketDataset& dataset() const { return *dataset_; }

 private:
  const MarketDataset* dataset_;
  std::unordered_map<std::uint64_t, FactorVector> rows_;
};

enum class TrainingSetKind { regression, flat_projection, sequence_projection };

struct SampleOrigin {
  StockId stock_id;
  Date date;  // the (last) factor date of the sample
};

struct TrainingSet {
  TrainingSetKind kind = TrainingSetKind::regression;
  DenseMatrix inputs;       // regression and flat samples
  SequenceBatch sequences;  // sequence samples, one matrix per step
  std::vector<double> labels;
  std::vector<SampleOrigin> provenance;
  std::vector<int> industry;  // regression samples only
  /// Pooled normalization of the training panels (projection sets only).
  NormalizationStats stats;

  std::size_t size() const { return labels.size(); }
};

/// Columns fed to the valuation regression: every factor except LN_MCAP.
inline constexpr std::size_t kRegressionFactorCount = kFactorCount - 1;

/// One sample per (stock, training day): the 46 non-label factors normalized on that day,
/// labelled with ln(market cap) on the same day. Throws StrategyError on an empty universe.
TrainingSet build_regression_set(const MarketDataset& dataset, const TrainingWindow& window,
                                 std::span<const StockId> universe, FactorCache* cache = nullptr);

/// Flat: one sample per (stock, training day) labelled with the excess return up to the next
/// action day. Sequence: one sample per stock over all training days, labelled with the excess
/// return from the last training day to the action day. Inputs use pooled training statistics.
TrainingSet build_projection_set(const MarketDataset& dataset, const TrainingWindow& window,
                                 std::span<const StockId> universe, bool sequence,
                                 FactorCache* cache = nullptr);

/// ln(mcap) ~ intercept + optional industry one-hot + 46 factors.
struct LinearValuationModel {
  std::vector<double> weights;
  std::vector<int> industries;  // one-hot columns, ascending code; empty when disabled
  bool fitted = false;

  /// Throws StrategyError on an empty or non-regression set.
  static LinearValuationModel fit(const TrainingSet& set, bool industry_dummies);
  double predict(std::span<const double> factors46, int industry) const;
};

struct RankedStock {
  StockId stock_id;
  double score = 0.0;
};

struct Ranking {
  Date date;
  std::vector<RankedStock> entries;  // descending score, ties by ascending id
};

/// Sorts entries descending by score, ties by ascending stock id. Throws StrategyError on a non-finite score.
Ranking make_ranking(Date date, std::vector<RankedStock> entries);

struct StrategyOptions {
  int window = 3;
  TrainConfig train;  // train.seed is the master seed for the per-day streams
  bool industry_dummies = false;
  std::vector<std::size_t> mlp_hidden = {32, 20, 10};
  std::vector<std::size_t> lstm_hidden = {32, 16, 8};
};

/// Seeds of one action day's model: initialization and shuffling.
struct DaySeeds {
  std::uint64_t init = 0;
  std::uint64_t shuffle = 0;
};
DaySeeds day_seeds(std::uint64_t master, Date action_day);

/// Score = m_predicted - m_actual on the action day.
Ranking rank_linear_regression(const MarketDataset& dataset, Date action_day,
                               std::span<const StockId> universe, const StrategyOptions& options,
                               FactorCache* cache = nullptr);
/// Score = MLP prediction of the next-month excess return.
Ranking rank_fcnn(const MarketDataset& dataset, Date action_day, std::span<const StockId> universe,
                  const StrategyOptions& options, FactorCache* cache = nullptr);
/// Score = LSTM prediction from the window shifted right by one action day.
Ranking rank_lstm(const MarketDataset& dataset, Date action_day, std::span<const StockId> universe,
                  const StrategyOptions& options, FactorCache* cache = nullptr);
Ranking rank_stocks(StrategyKind kind, const MarketDataset& dataset, Date action_day,
                    std::span<const StockId> universe, const StrategyOptions& options,
                    FactorCache* cache = nullptr);

/// Trained sequence model with the set it was fitted on (diagnostics).
struct LstmFit {
  TrainingSet set;
  TrainResult<LstmModel> result;
};
LstmFit fit_lstm(const MarketDataset& dataset, Date action_day, std::span<const StockId> universe,
                 const StrategyOptions& options, FactorCache* cache = nullptr);

/// Top min(K, |ranking|) stocks at weight 1/K each. Throws SelectionError on an empty ranking
/// and ConfigError when K < 1.
std::map<StockId, double> select_targets(const Ranking& ranking, int holdings);

}  // namespace deeprank
