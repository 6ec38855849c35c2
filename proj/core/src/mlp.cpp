#include "deeprank/mlp.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "deeprank/error.hpp"
#include "deeprank/rng.hpp"

namespace deeprank {

void MlpModel::layout(std::vector<std::size_t> dims) {
  if (dims.size() < 2) throw ArgumentError("numerics", "an MLP needs at least input and output sizes");
  for (auto d : dims) {
    if (d == 0) throw ArgumentError("numerics", "MLP layer sizes must be positive");
  }
  dims_ = std::move(dims);
  offsets_.clear();
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(total);
    total += dims_[l + 1] * dims_[l] + dims_[l + 1];
  }
  params_.assign(total, 0.0);
}

MlpModel MlpModel::zeros(std::vector<std::size_t> dims) {
  MlpModel m;
  m.layout(std::move(dims));
  return m;
}

MlpModel MlpModel::create(std::vector<std::size_t> dims, std::uint64_t seed) {
  MlpModel m = zeros(std::move(dims));
  m.seed_ = seed;
  Rng rng(seed);
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m.dims_[l] + m.dims_[l + 1]));
    for (double& w : m.weights(l)) w = rng.uniform(-limit, limit);
  }
  return m;
}

MlpModel MlpModel::from_parameters(std::vector<std::size_t> dims, std::uint64_t seed,
                                   std::vector<double> parameters) {
  MlpModel m = zeros(std::move(dims));
  if (parameters.size() != m.params_.size()) {
    throw ArgumentError("numerics", fmt::format("MLP expects {} parameters, got {}", m.params_.size(),
                                                parameters.size()));
  }
  m.params_ = std::move(parameters);
  m.seed_ = seed;
  return m;
}

std::span<double> MlpModel::weights(std::size_t layer) {
  return std::span<double>(params_).subspan(offsets_[layer], dims_[layer + 1] * dims_[layer]);
}
std::span<const double> MlpModel::weights(std::size_t layer) const {
  return std::span<const double>(params_).subspan(offsets_[layer], dims_[layer + 1] * dims_[layer]);
}
std::span<double> MlpModel::bias(std::size_t layer) {
  return std::span<double>(params_).subspan(offsets_[layer] + dims_[layer + 1] * dims_[layer],
                                            dims_[layer + 1]);
}
std::span<const double> MlpModel::bias(std::size_t layer) const {
  return std::span<const double>(params_).subspan(offsets_[layer] + dims_[layer + 1] * dims_[layer],
                                                  dims_[layer + 1]);
}

namespace {

void check_batch(const MlpModel& model, const DenseMatrix& batch) {
  if (batch.cols() != model.input_width()) {
    throw ArgumentError("numerics", fmt::format("MLP expects width {}, batch has {}",
                                                model.input_width(), batch.cols()));
  }
}

// activations[l] holds the post-activation output of layer l-1 (activations[0] = input row).
void forward_row(const MlpModel& model, std::span<const double> input,
                 std::vector<std::vector<double>>& activations) {
  activations.resize(model.layer_count() + 1);
  activations[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const std::size_t in = model.dims()[l];
    const std::size_t out = model.dims()[l + 1];
    const auto w = model.weights(l);
    const auto b = model.bias(l);
    auto& next = activations[l + 1];
    next.resize(out);
    const auto& prev = activations[l];
    for (std::size_t o = 0; o < out; ++o) {
      double z = b[o];
      const double* wr = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) z += wr[i] * prev[i];
      next[o] = model.activation(l) == Activation::relu ? std::max(z, 0.0) : z;
    }
  }
}

}  // namespace

std::vector<double> mlp_forward(const MlpModel& model, const DenseMatrix& batch) {
  check_batch(model, batch);
  if (model.dims().back() != 1) throw ArgumentError("numerics", "mlp_forward expects a scalar output");
  std::vector<double> out(batch.rows());
  std::vector<std::vector<double>> acts;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    forward_row(model, batch.row(r), acts);
    out[r] = acts.back()[0];
  }
  return out;
}

double mlp_loss_and_gradient(const MlpModel& model, const DenseMatrix& batch,
                             std::span<const double> labels, std::span<double> gradient) {
  check_batch(model, batch);
  if (labels.size() != batch.rows() || batch.rows() == 0) {
    throw ArgumentError("numerics", "labels must match a nonempty batch");
  }
  if (gradient.size() != model.parameter_count()) {
    throw ArgumentError("numerics", "gradient buffer has the wrong size");
  }
  std::fill(gradient.begin(), gradient.end(), 0.0);
  const double n = static_cast<double>(batch.rows());
  double loss = 0.0;
  std::vector<std::vector<double>> acts;
  std::vector<double> delta, prev_delta;
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    forward_row(model, batch.row(r), acts);
    const double err = acts.back()[0] - labels[r];
    loss += err * err;
    delta.assign(1, 2.0 * err / n);
    for (std::size_t l = model.layer_count(); l-- > 0;) {
      const std::size_t in = model.dims()[l];
      const std::size_t out = model.dims()[l + 1];
      if (model.activation(l) == Activation::relu) {
        for (std::size_t o = 0; o < out; ++o) {
          if (!(acts[l + 1][o] > 0.0)) delta[o] = 0.0;
        }
      }
      const std::size_t woff = model.weight_offset(l);
      const std::size_t boff = woff + out * in;
      const auto w = model.weights(l);
      prev_delta.assign(in, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        gradient[boff + o] += d;
        double* g = gradient.data() + woff + o * in;
        const double* wr = w.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) {
          g[i] += d * acts[l][i];
          prev_delta[i] += d * wr[i];
        }
      }
      delta.swap(prev_delta);
    }
  }
  return loss / n;
}

}  // namespace deeprank
