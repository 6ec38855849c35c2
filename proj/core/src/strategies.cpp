#include "deeprank/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "deeprank/error.hpp"
#include "deeprank/least_squares.hpp"
#include "deeprank/rng.hpp"

namespace deeprank {

StrategyKind parse_strategy(std::string_view name) {
  if (name == "linreg") return StrategyKind::linreg;
  if (name == "fcnn") return StrategyKind::fcnn;
  if (name == "lstm") return StrategyKind::lstm;
  throw ConfigError("strategies", fmt::format("unknown strategy '{}' (expected linreg, fcnn or lstm)", name));
}

std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::linreg: return "linreg";
    case StrategyKind::fcnn: return "fcnn";
    case StrategyKind::lstm: return "lstm";
  }
  return "unknown";
}

TrainingWindow build_window(const TradingCalendar& calendar, Date action_day, int window) {
  if (window < 1) throw WindowError(fmt::format("window must be >= 1, got {}", window));
  const auto idx = calendar.index_of(action_day);
  if (!idx || !calendar.is_month_end(*idx)) {
    throw WindowError(fmt::format("{} is not an action day", action_day.to_string()));
  }
  const auto& ends = calendar.month_end_indices();
  const auto pos = static_cast<std::size_t>(std::lower_bound(ends.begin(), ends.end(), *idx) - ends.begin());
  const auto w = static_cast<std::size_t>(window);
  if (pos < w) {
    throw WindowError(fmt::format("{} has {} earlier action days, window needs {}", action_day.to_string(),
                                  pos, window));
  }
  TrainingWindow tw;
  tw.action_day = action_day;
  tw.prediction_day = action_day;
  for (std::size_t i = pos - w; i < pos; ++i) tw.training_days.push_back(calendar[ends[i]]);
  return tw;
}

std::optional<double> excess_return_label(const MarketDataset& dataset, std::size_t stock, Date t0, Date t1) {
  const auto& cal = dataset.calendar();
  const auto d0 = cal.index_of(t0);
  const auto d1 = cal.index_of(t1);
  if (!d0 || !d1) return std::nullopt;
  const TradeBar* b0 = dataset.bar(stock, *d0);
  const TradeBar* b1 = dataset.bar(stock, *d1);
  if (b0 == nullptr || b1 == nullptr || b0->is_suspended || b1->is_suspended) return std::nullopt;
  if (!(b0->close > 0.0) || !(b1->close > 0.0)) return std::nullopt;
  const double stock_ret = b1->close / b0->close - 1.0;
  const double bench_ret = dataset.benchmark_close(*d1) / dataset.benchmark_close(*d0) - 1.0;
  return stock_ret - bench_ret;
}

const FactorVector& FactorCache::get(std::size_t stock, std::size_t day) {
  const std::uint64_t key = (static_cast<std::uint64_t>(stock) << 32) | static_cast<std::uint64_t>(day);
  auto it = rows_.find(key);
  if (it == rows_.end()) it = rows_.emplace(key, compute_raw_factors(*dataset_, stock, day)).first;
  return it->second;
}

FactorPanel FactorCache::panel(std::span<const StockId> universe, Date date) {
  const auto day = dataset_->calendar().index_of(date);
  if (!day) throw LookupError("factors", fmt::format("{} is not a trading date", date.to_string()));
  std::vector<StockId> ids(universe.begin(), universe.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  FactorPanel p;
  p.date = date;
  p.matrix = DenseMatrix(0, kFactorCount);
  for (const auto& id : ids) {
    const auto s = dataset_->stock_index(id);
    if (!s) throw LookupError("factors", fmt::format("unknown stock {}", id));
    const auto& v = get(*s, *day);
    if (v.missing_count() > kMaxMissingFactors) continue;
    p.stocks.push_back(id);
    p.matrix.append_row(v.values);
    for (bool m : v.missing) p.missing.push_back(m ? 1 : 0);
  }
  return p;
}

namespace {

FactorPanel raw_panel(const MarketDataset& dataset, std::span<const StockId> universe, Date date,
                      FactorCache* cache) {
  return cache != nullptr ? cache->panel(universe, date) : build_panel(dataset, universe, date);
}

std::size_t stock_of(const MarketDataset& dataset, const StockId& id) {
  return *dataset.stock_index(id);
}

/// ln(market cap) from an unsuspended bar on exactly `date`.
std::optional<double> log_mcap_on(const MarketDataset& dataset, std::size_t stock, Date date) {
  const TradeBar* bar = dataset.bar(dataset.stocks()[stock], date);
  if (bar == nullptr || bar->is_suspended || !(bar->market_cap > 0.0)) return std::nullopt;
  return std::log(bar->market_cap);
}

int industry_of(const MarketDataset& dataset, std::size_t stock, Date date) {
  const FundamentalSnapshot* f = dataset.fundamentals_as_of(stock, date);
  return f != nullptr ? f->industry_code : 0;
}

void drop_label_column(std::span<const double> row, std::vector<double>& out) {
  out.clear();
  for (std::size_t c = 0; c < kFactorCount; ++c) {
    if (c != column(FactorId::LN_MCAP)) out.push_back(row[c]);
  }
}

void require_universe(std::span<const StockId> universe) {
  if (universe.empty()) throw StrategyError("universe is empty");
}

}  // namespace

TrainingSet build_regression_set(const MarketDataset& dataset, const TrainingWindow& window,
                                 std::span<const StockId> universe, FactorCache* cache) {
  require_universe(universe);
  TrainingSet set;
  set.kind = TrainingSetKind::regression;
  set.inputs = DenseMatrix(0, kRegressionFactorCount);
  std::vector<double> row;
  for (const Date day : window.training_days) {
    const FactorPanel norm = normalize_panel(raw_panel(dataset, universe, day, cache));
    for (std::size_t r = 0; r < norm.size(); ++r) {
      const std::size_t s = stock_of(dataset, norm.stocks[r]);
      const auto label = log_mcap_on(dataset, s, day);
      if (!label) continue;
      drop_label_column(norm.matrix.row(r), row);
      set.inputs.append_row(row);
      set.labels.push_back(*label);
      set.provenance.push_back({norm.stocks[r], day});
      set.industry.push_back(industry_of(dataset, s, day));
    }
  }
  return set;
}

TrainingSet build_projection_set(const MarketDataset& dataset, const TrainingWindow& window,
                                 std::span<const StockId> universe, bool sequence, FactorCache* cache) {
  require_universe(universe);
  const std::size_t w = window.training_days.size();
  std::vector<FactorPanel> raws;
  raws.reserve(w);
  for (const Date day : window.training_days) raws.push_back(raw_panel(dataset, universe, day, cache));

  TrainingSet set;
  set.stats = fit_normalization(stack_panels(raws));
  std::vector<FactorPanel> norms;
  norms.reserve(w);
  for (const auto& raw : raws) norms.push_back(apply_normalization(raw, set.stats));

  if (!sequence) {
    set.kind = TrainingSetKind::flat_projection;
    set.inputs = DenseMatrix(0, kFactorCount);
    for (std::size_t i = 0; i < w; ++i) {
      const Date from = window.training_days[i];
      const Date to = i + 1 < w ? window.training_days[i + 1] : window.action_day;
      for (std::size_t r = 0; r < norms[i].size(); ++r) {
        const auto label = excess_return_label(dataset, stock_of(dataset, norms[i].stocks[r]), from, to);
        if (!label) continue;
        set.inputs.append_row(norms[i].matrix.row(r));
        set.labels.push_back(*label);
        set.provenance.push_back({norms[i].stocks[r], from});
      }
    }
    return set;
  }

  set.kind = TrainingSetKind::sequence_projection;
  set.sequences.assign(w, DenseMatrix(0, kFactorCount));
  const Date last = window.training_days.back();
  for (std::size_t r = 0; r < norms.back().size(); ++r) {
    const StockId& id = norms.back().stocks[r];
    std::vector<std::size_t> rows(w);
    bool complete = true;
    for (std::size_t t = 0; t < w && complete; ++t) {
      rows[t] = norms[t].find(id);
      complete = rows[t] != FactorPanel::npos;
    }
    if (!complete) continue;
    const auto label = excess_return_label(dataset, stock_of(dataset, id), last, window.action_day);
    if (!label) continue;
    for (std::size_t t = 0; t < w; ++t) set.sequences[t].append_row(norms[t].matrix.row(rows[t]));
    set.labels.push_back(*label);
    set.provenance.push_back({id, last});
  }
  return set;
}

LinearValuationModel LinearValuationModel::fit(const TrainingSet& set, bool industry_dummies) {
  if (set.kind != TrainingSetKind::regression) throw StrategyError("valuation model needs a regression set");
  if (set.size() == 0) throw StrategyError("regression set is empty");
  LinearValuationModel m;
  if (industry_dummies) {
    std::set<int> codes(set.industry.begin(), set.industry.end());
    m.industries.assign(codes.begin(), codes.end());
  }
  const std::size_t width = 1 + m.industries.size() + kRegressionFactorCount;
  DenseMatrix x(set.size(), width);
  for (std::size_t r = 0; r < set.size(); ++r) {
    x(r, 0) = 1.0;
    if (industry_dummies) {
      const auto it = std::lower_bound(m.industries.begin(), m.industries.end(), set.industry[r]);
      x(r, 1 + static_cast<std::size_t>(it - m.industries.begin())) = 1.0;
    }
    const auto row = set.inputs.row(r);
    std::copy(row.begin(), row.end(), x.row(r).begin() + static_cast<std::ptrdiff_t>(1 + m.industries.size()));
  }
  try {
    m.weights = least_squares_fit(x, set.labels);
  } catch (const DegenerateInputError& e) {
    throw StrategyError(fmt::format("valuation regression is degenerate: {}", e.what()));
  }
  m.fitted = true;
  return m;
}

double LinearValuationModel::predict(std::span<const double> factors46, int industry) const {
  double z = weights[0];
  const auto it = std::lower_bound(industries.begin(), industries.end(), industry);
  if (it != industries.end() && *it == industry) z += weights[1 + static_cast<std::size_t>(it - industries.begin())];
  const std::size_t base = 1 + industries.size();
  for (std::size_t c = 0; c < factors46.size(); ++c) z += weights[base + c] * factors46[c];
  return z;
}

Ranking make_ranking(Date date, std::vector<RankedStock> entries) {
  for (const auto& e : entries) {
    if (!std::isfinite(e.score)) {
      throw StrategyError(fmt::format("non-finite score for {} on {}", e.stock_id, date.to_string()));
    }
  }
  std::sort(entries.begin(), entries.end(), [](const RankedStock& a, const RankedStock& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.stock_id < b.stock_id;
  });
  return Ranking{date, std::move(entries)};
}

DaySeeds day_seeds(std::uint64_t master, Date action_day) {
  const auto k = static_cast<std::uint64_t>(static_cast<std::int64_t>(action_day.days()));
  return {mix_seed(master, 2 * k), mix_seed(master, 2 * k + 1)};
}

namespace {

TrainingWindow window_or_throw(const MarketDataset& dataset, Date action_day, int w) {
  try {
    return build_window(dataset.calendar(), action_day, w);
  } catch (const WindowError& e) {
    throw StrategyError(e.what());
  }
}

void require_samples(const TrainingSet& set, Date action_day) {
  if (set.size() == 0) {
    throw StrategyError(fmt::format("no training samples for action day {}", action_day.to_string()));
  }
}

template <typename Model, typename Inputs>
TrainResult<Model> train_or_throw(Model model, const Inputs& inputs, const std::vector<double>& labels,
                                  const TrainConfig& config, Date action_day) {
  try {
    return train(std::move(model), inputs, labels, config);
  } catch (const TrainingError& e) {
    throw StrategyError(fmt::format("training for {} diverged: {}", action_day.to_string(), e.what()));
  }
}

TrainConfig day_config(const StrategyOptions& options, const DaySeeds& seeds) {
  TrainConfig c = options.train;
  c.seed = seeds.shuffle;
  return c;
}

}  // namespace

Ranking rank_linear_regression(const MarketDataset& dataset, Date action_day, std::span<const StockId> universe,
                               const StrategyOptions& options, FactorCache* cache) {
  const TrainingWindow window = window_or_throw(dataset, action_day, options.window);
  const TrainingSet set = build_regression_set(dataset, window, universe, cache);
  require_samples(set, action_day);
  const auto model = LinearValuationModel::fit(set, options.industry_dummies);

  const FactorPanel raw = raw_panel(dataset, universe, action_day, cache);
  const FactorPanel norm = normalize_panel(raw);
  std::vector<RankedStock> entries;
  std::vector<double> row;
  for (std::size_t r = 0; r < norm.size(); ++r) {
    if (raw.is_missing(r, column(FactorId::LN_MCAP))) continue;
    const std::size_t s = stock_of(dataset, norm.stocks[r]);
    drop_label_column(norm.matrix.row(r), row);
    const double predicted = model.predict(row, industry_of(dataset, s, action_day));
    const double actual = raw.matrix(r, column(FactorId::LN_MCAP));
    entries.push_back({norm.stocks[r], predicted - actual});
  }
  return make_ranking(action_day, std::move(entries));
}

Ranking rank_fcnn(const MarketDataset& dataset, Date action_day, std::span<const StockId> universe,
                  const StrategyOptions& options, FactorCache* cache) {
  const TrainingWindow window = window_or_throw(dataset, action_day, options.window);
  const TrainingSet set = build_projection_set(dataset, window, universe, false, cache);
  require_samples(set, action_day);
  const DaySeeds seeds = day_seeds(options.train.seed, action_day);

  std::vector<std::size_t> dims{kFactorCount};
  dims.insert(dims.end(), options.mlp_hidden.begin(), options.mlp_hidden.end());
  dims.push_back(1);
  auto fit = train_or_throw(MlpModel::create(dims, seeds.init), set.inputs, set.labels,
                            day_config(options, seeds), action_day);

  const FactorPanel norm = apply_normalization(raw_panel(dataset, universe, action_day, cache), set.stats);
  const auto scores = mlp_forward(fit.model, norm.matrix);
  std::vector<RankedStock> entries;
  for (std::size_t r = 0; r < norm.size(); ++r) entries.push_back({norm.stocks[r], scores[r]});
  return make_ranking(action_day, std::move(entries));
}

LstmFit fit_lstm(const MarketDataset& dataset, Date action_day, std::span<const StockId> universe,
                 const StrategyOptions& options, FactorCache* cache) {
  const TrainingWindow window = window_or_throw(dataset, action_day, options.window);
  TrainingSet set = build_projection_set(dataset, window, universe, true, cache);
  require_samples(set, action_day);
  const DaySeeds seeds = day_seeds(options.train.seed, action_day);
  auto model = LstmModel::create(kFactorCount, options.lstm_hidden, window.training_days.size(), seeds.init);
  auto result = train_or_throw(std::move(model), set.sequences, set.labels, day_config(options, seeds), action_day);
  return LstmFit{std::move(set), std::move(result)};
}

Ranking rank_lstm(const MarketDataset& dataset, Date action_day, std::span<const StockId> universe,
                  const StrategyOptions& options, FactorCache* cache) {
  const LstmFit fit = fit_lstm(dataset, action_day, universe, options, cache);
  const TrainingWindow window = window_or_throw(dataset, action_day, options.window);

  // Prediction window: the training window shifted right by one action day.
  std::vector<Date> days(window.training_days.begin() + 1, window.training_days.end());
  days.push_back(action_day);
  std::vector<FactorPanel> norms;
  for (const Date d : days) norms.push_back(apply_normalization(raw_panel(dataset, universe, d, cache), fit.set.stats));

  SequenceBatch batch(days.size(), DenseMatrix(0, kFactorCount));
  std::vector<StockId> ids;
  for (const auto& id : norms.back().stocks) {
    std::vector<std::size_t> rows(days.size());
    bool complete = true;
    for (std::size_t t = 0; t < days.size() && complete; ++t) {
      rows[t] = norms[t].find(id);
      complete = rows[t] != FactorPanel::npos;
    }
    if (!complete) continue;
    for (std::size_t t = 0; t < days.size(); ++t) batch[t].append_row(norms[t].matrix.row(rows[t]));
    ids.push_back(id);
  }
  std::vector<RankedStock> entries;
  if (!ids.empty()) {
    const auto scores = lstm_forward(fit.result.model, batch);
    for (std::size_t i = 0; i < ids.size(); ++i) entries.push_back({ids[i], scores[i]});
  }
  return make_ranking(action_day, std::move(entries));
}

Ranking rank_stocks(StrategyKind kind, const MarketDataset& dataset, Date action_day,
                    std::span<const StockId> universe, const StrategyOptions& options, FactorCache* cache) {
  switch (kind) {
    case StrategyKind::linreg: return rank_linear_regression(dataset, action_day, universe, options, cache);
    case StrategyKind::fcnn: return rank_fcnn(dataset, action_day, universe, options, cache);
    case StrategyKind::lstm: return rank_lstm(dataset, action_day, universe, options, cache);
  }
  throw StrategyError("unknown strategy");
}

std::map<StockId, double> select_targets(const Ranking& ranking, int holdings) {
  if (holdings < 1) throw ConfigError("strategies", fmt::format("holdings must be >= 1, got {}", holdings));
  if (ranking.entries.empty()) {
    throw SelectionError(fmt::format("empty ranking on {}", ranking.date.to_string()));
  }
  std::map<StockId, double> targets;
  const std::size_t k = std::min(ranking.entries.size(), static_cast<std::size_t>(holdings));
  for (std::size_t i = 0; i < k; ++i) targets[ranking.entries[i].stock_id] = 1.0 / holdings;
  return targets;
}

}  // namespace deeprank
