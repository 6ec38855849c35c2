#pragma once

#include <span>
#include <vector>

#include "deeprank/matrix.hpp"

namespace deeprank {

inline constexpr double kRidgeLambda = 1e-8;

/// argmin_w mean((X w - y)^2) through the normal equations (X'X + ridge I) w = X'y,
/// solved by Cholesky factorization.
std::vector<double> least_squares_fit(const DenseMatrix& X, std::span<const double> y,
                                      double ridge = kRidgeLambda);

/// Mean of squared element-wise differences.
double mse(std::span<const double> predictions, std::span<const double> labels);

}  // namespace deeprank
