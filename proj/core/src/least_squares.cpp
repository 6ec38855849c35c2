#include "deeprank/least_squares.hpp"

#include <cmath>

#include <fmt/format.h>

#include "deeprank/error.hpp"

namespace deeprank {

std::vector<double> least_squares_fit(const DenseMatrix& X, std::span<const double> y, double ridge) {
  const std::size_t n = X.rows();
  const std::size_t p = X.cols();
  if (n == 0 || p == 0) throw ArgumentError("numerics", "least squares needs n >= 1 and p >= 1");
  if (y.size() != n) {
    throw ArgumentError("numerics", fmt::format("least squares: {} rows but {} labels", n, y.size()));
  }
  if (!X.all_finite()) throw ArgumentError("numerics", "least squares: non-finite design matrix");
  for (double v : y) {
    if (!std::isfinite(v)) throw ArgumentError("numerics", "least squares: non-finite label");
  }

  // Lower triangle of A = X'X + ridge I, and b = X'y.
  std::vector<double> a(p * p, 0.0), b(p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = X.row(r);
    for (std::size_t i = 0; i < p; ++i) {
      const double xi = row[i];
      b[i] += xi * y[r];
      double* ai = a.data() + i * p;
      for (std::size_t j = 0; j <= i; ++j) ai[j] += xi * row[j];
    }
  }
  for (std::size_t i = 0; i < p; ++i) a[i * p + i] += ridge;

  // In-place Cholesky, A = L L'.
  for (std::size_t j = 0; j < p; ++j) {
    double d = a[j * p + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * p + k] * a[j * p + k];
    if (!(d > 0.0)) throw DegenerateInputError("numerics", "normal equations are not positive definite");
    const double l = std::sqrt(d);
    a[j * p + j] = l;
    for (std::size_t i = j + 1; i < p; ++i) {
      double s = a[i * p + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * p + k] * a[j * p + k];
      a[i * p + j] = s / l;
    }
  }
  std::vector<double> w(p);
  for (std::size_t i = 0; i < p; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * p + k] * w[k];
    w[i] = s / a[i * p + i];
  }
  for (std::size_t i = p; i-- > 0;) {
    double s = w[i];
    for (std::size_t k = i + 1; k < p; ++k) s -= a[k * p + i] * w[k];
    w[i] = s / a[i * p + i];
  }
  return w;
}

double mse(std::span<const double> predictions, std::span<const double> labels) {
  if (predictions.size() != labels.size()) {
    throw ArgumentError("numerics", fmt::format("mse: {} predictions vs {} labels", predictions.size(),
                                                labels.size()));
  }
  if (predictions.empty()) throw ArgumentError("numerics", "mse of empty vectors");
  double acc = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double d = predictions[i] - labels[i];
    acc += d * d;
  }
  return acc / static_cast<double>(labels.size());
}

}  // namespace deeprank
