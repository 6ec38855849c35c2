#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "deeprank/lstm.hpp"
#include "deeprank/matrix.hpp"
#include "deeprank/mlp.hpp"

namespace deeprank {

inline constexpr double kGradientCheckStep = 1e-5;

/// Called on the analytic gradient before comparison. Used to inject faults in tests.
using GradientHook = std::function<void(std::span<double>)>;

struct GradientCheckResult {
  /// max over parameters of |g_a - g_n| / max(1, |g_a| + |g_n|)
  double max_relative_error = 0.0;
  std::size_t worst_parameter = 0;
  std::size_t parameters_checked = 0;
};

/// Central differences of the batch MSE over every parameter.
GradientCheckResult gradient_check(const MlpModel& model, const DenseMatrix& batch,
                                   std::span<const double> labels, const GradientHook& hook = {});
GradientCheckResult gradient_check(const LstmModel& model, const SequenceBatch& batch,
                                   std::span<const double> labels, const GradientHook& hook = {});

/// |a - n| / max(1, |a| + |n|)
double gradient_relative_error(double analytic, double numeric);

}  // namespace deeprank
