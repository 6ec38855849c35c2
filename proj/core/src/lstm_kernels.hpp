#pragma once

// Per-sample LSTM kernels shared by the forward pass, back-propagation and the
// finite-difference checker.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <vector>

#include "deeprank/lstm.hpp"

// Wider-vector clones of the hot loops, picked at load time. FMA stays off so every
// clone rounds exactly like the baseline.
#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__) && defined(__linux__)
#define DEEPRANK_SIMD_CLONES __attribute__((target_clones("avx512f", "avx2", "default")))
#else
#define DEEPRANK_SIMD_CLONES
#endif

#if defined(__GNUC__)
#define DEEPRANK_ALWAYS_INLINE [[gnu::always_inline]] inline
#else
#define DEEPRANK_ALWAYS_INLINE inline
#endif

namespace deeprank::detail {

/// e^x by Cody-Waite reduction and a degree-13 polynomial, within 2 ulp on [-708, 709].
/// Beyond that range the result saturates near 1e308 or 2e-308; NaN propagates.
/// Branch-free so loops over it vectorize, and built only from IEEE add and multiply,
/// so scalar and vector builds agree bit for bit.
DEEPRANK_ALWAYS_INLINE double exp_kernel(double x) {
  constexpr double kLog2e = 1.4426950408889634;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  constexpr double kShift = 6755399441055744.0;  // 1.5 * 2^52
  const double shifted = x * kLog2e + kShift;
  const double k = shifted - kShift;
  const double r = (x - k * kLn2Hi) - k * kLn2Lo;
  double p = 1.0 / 6227020800.0;
  p = p * r + 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  // The low mantissa bits of `shifted` hold k; clamp it and move it into the exponent field.
  std::int64_t kbits = std::bit_cast<std::int64_t>(shifted) - std::bit_cast<std::int64_t>(kShift);
  kbits = std::min<std::int64_t>(std::max<std::int64_t>(kbits, -1022), 1023);
  return p * std::bit_cast<double>((kbits + 1023) << 52);
}

DEEPRANK_ALWAYS_INLINE double sigmoid(double z) { return 1.0 / (1.0 + exp_kernel(-z)); }

/// tanh from one exponential; absolute error stays near machine epsilon.
DEEPRANK_ALWAYS_INLINE double tanh_kernel(double x) {
  const double e = exp_kernel(-2.0 * std::abs(x));
  return std::copysign((1.0 - e) / (1.0 + e), x);
}

/// proj[t] = b + x_t W_x for steps t >= t_begin; inputs is T x n_x, proj is T x 4 n_a.
void project_inputs(const LstmModel& m, std::size_t layer, const double* inputs, double* proj,
                    std::size_t t_begin);

/// Runs one layer's recurrence over projected inputs from step t_begin, reading the
/// previous step's activation and cell from the output arrays. Writes activations (T x n_a)
/// and the gate, cell and tanh(cell) values used by back-propagation.
void recur(const LstmModel& m, std::size_t layer, const double* proj, std::size_t t_begin,
           double* activations, double* gates, double* cells, double* tanh_cells);

double readout(const LstmModel& m, const double* last_activation);

/// Full forward pass of one sample. `steps` holds T rows of input_width values.
struct SampleWorkspace {
  std::vector<std::vector<double>> proj;        // per layer, T x 4 n_a
  std::vector<std::vector<double>> activations; // per layer, T x n_a
  std::vector<std::vector<double>> gates;       // per layer, T x 4 n_a (post-nonlinearity)
  std::vector<std::vector<double>> cells;       // per layer, T x n_a
  std::vector<std::vector<double>> tanh_cells;  // per layer, T x n_a
  void resize(const LstmModel& m);
};

void recur(const LstmModel& m, std::size_t layer, std::size_t t_begin, SampleWorkspace& ws);

double forward_sample(const LstmModel& m, const double* steps, SampleWorkspace& ws);

/// Recomputes the step-0 state of one unit from ws.proj[layer].
void first_step_unit(const LstmModel& m, std::size_t layer, std::size_t unit, SampleWorkspace& ws);

/// Forward pass from `layer` upward. `layer` restarts at layer_step and the layers above
/// at upper_step; the state of the step before each restart is read from ws, as are
/// ws.proj[layer] and the activations below `layer`.
double forward_from(const LstmModel& m, std::size_t layer, std::size_t layer_step, std::size_t upper_step,
                    SampleWorkspace& ws);

}  // namespace deeprank::detail
