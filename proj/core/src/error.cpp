#include "deeprank/error.hpp"

#include <fmt/format.h>

namespace deeprank {

Error::Error(ErrorCategory category, std::string module, const std::string& message)
    : std::runtime_error(message), category_(category), module_(std::move(module)) {}

ParseError::ParseError(const std::string& file, std::size_t line, std::size_t column,
                       const std::string& message)
    : Error(ErrorCategory::data, "marketdata",
            fmt::format("{}:{}:{}: {}", file, line, column, message)) {}

TrainingError::TrainingError(int epoch, const std::string& message)
    : Error(ErrorCategory::numeric, "numerics",
            fmt::format("epoch {}: {}", epoch, message)),
      epoch_(epoch) {}

}  // namespace deeprank
