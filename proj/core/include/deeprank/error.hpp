#pragma once

#include <stdexcept>
#include <string>

namespace deeprank {

/// Broad error family; the CLI maps each one to an exit code.
enum class ErrorCategory { config, data, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string module, const std::string& message);

  ErrorCategory category() const noexcept { return category_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCategory category_;
  std::string module_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string module, const std::string& message)
      : Error(ErrorCategory::config, std::move(module), message) {}
};

/// Malformed file content; the message names file, line and column.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, std::size_t column,
             const std::string& message);
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorCategory::data, "marketdata", message) {}
};

class LookupError : public Error {
 public:
  LookupError(std::string module, const std::string& message)
      : Error(ErrorCategory::data, std::move(module), message) {}
};

class IoError : public Error {
 public:
  IoError(std::string module, const std::string& message)
      : Error(ErrorCategory::data, std::move(module), message) {}
};

/// Precondition violated by a caller (shapes, lengths, non-finite input).
class ArgumentError : public Error {
 public:
  ArgumentError(std::string module, const std::string& message)
      : Error(ErrorCategory::numeric, std::move(module), message) {}
};

class DegenerateInputError : public Error {
 public:
  DegenerateInputError(std::string module, const std::string& message)
      : Error(ErrorCategory::numeric, std::move(module), message) {}
};

class TrainingError : public Error {
 public:
  TrainingError(int epoch, const std::string& message);
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class WindowError : public Error {
 public:
  explicit WindowError(const std::string& message)
      : Error(ErrorCategory::data, "strategies", message) {}
};

class StrategyError : public Error {
 public:
  explicit StrategyError(const std::string& message)
      : Error(ErrorCategory::numeric, "strategies", message) {}
};

class SelectionError : public Error {
 public:
  explicit SelectionError(const std::string& message)
      : Error(ErrorCategory::numeric, "strategies", message) {}
};

class RebalanceError : public Error {
 public:
  explicit RebalanceError(const std::string& message)
      : Error(ErrorCategory::data, "backtest", message) {}
};

}  // namespace deeprank
