#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "deeprank/error.hpp"

namespace deeprank::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

int exit_code(ErrorCategory category);

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  /// gradcheck only: corrupts one analytic gradient entry.
  bool inject_fault = false;
};

/// Writes bars.csv, fundamentals.csv and benchmark.csv and prints a digest.
void cmd_gen_data(const CommandOptions& options, std::ostream& out);
/// Runs every configured strategy and writes <out>/<strategy>/{report.json,series.csv,trades.csv,ranking.csv}.
void cmd_backtest(const CommandOptions& options, std::ostream& out);
/// Returns true when both gradient checks pass.
bool cmd_gradcheck(const CommandOptions& options, std::ostream& out);
/// Re-renders report.json next to every series.csv found under --out.
void cmd_report(const CommandOptions& options, std::ostream& out);

/// Full command line handling; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace deeprank::app
