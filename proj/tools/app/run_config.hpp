#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "deeprank/backtest.hpp"
#include "deeprank/strategies.hpp"
#include "deeprank/synthetic.hpp"
#include "deeprank/training.hpp"

namespace deeprank::app {

// Per-component seeds are the master seed plus a fixed offset.
inline constexpr std::uint64_t kSyntheticSeedOffset = 1;
inline constexpr std::uint64_t kTrainingSeedOffset = 2;
inline constexpr std::uint64_t kGradcheckMlpSeedOffset = 3;
inline constexpr std::uint64_t kGradcheckLstmSeedOffset = 4;
inline constexpr std::uint64_t kGradcheckDataSeedOffset = 5;

struct DataPaths {
  std::filesystem::path bars;
  std::filesystem::path fundamentals;
  std::filesystem::path benchmark;
};

struct RunConfig {
  std::optional<DataPaths> data;
  std::optional<SyntheticMarketConfig> synthetic;
  bool synthetic_seed_explicit = false;
  DateRange scenario{Date::from_ymd(2015, 6, 1), Date::from_ymd(2016, 1, 1)};
  std::vector<StrategyKind> strategies{StrategyKind::linreg, StrategyKind::fcnn, StrategyKind::lstm};
  int window = 3;
  int holdings = 10;
  TrainConfig train;
  CostModel costs;
  EligibilityRules eligibility;
  bool industry_dummies = false;
  double initial_capital = 1'000'000.0;
  double risk_free_annual = 0.03;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;

  /// Re-derives component seeds after the master seed changes.
  void apply_seed(std::uint64_t master);
  /// Throws ConfigError.
  void validate() const;
  ScenarioConfig scenario_config() const;
};

/// Parses a JSON config; relative paths resolve against the file's directory.
/// Unknown keys, wrong types and invalid values raise ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);

}  // namespace deeprank::app
