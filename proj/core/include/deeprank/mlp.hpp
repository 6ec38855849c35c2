#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "deeprank/matrix.hpp"

namespace deeprank {

enum class Activation { relu, identity };

/// Input width 47, hidden layers of 32, 20 and 10 units, scalar read-out.
inline const std::vector<std::size_t> kDefaultMlpDims = {47, 32, 20, 10, 1};

/// Fully connected network: ReLU on every hidden layer, identity on the output.
///
/// All parameters live in one flat vector. Layer l owns an out x in row-major
/// weight block followed by its out-sized bias.
class MlpModel {
 public:
  MlpModel() = default;

  /// Uniform +-sqrt(6 / (fan_in + fan_out)) weights and zero biases, seeded.
  static MlpModel create(std::vector<std::size_t> dims, std::uint64_t seed);
  static MlpModel zeros(std::vector<std::size_t> dims);
  /// Rebuilds a model from a stored parameter vector; throws ArgumentError on a size mismatch.
  static MlpModel from_parameters(std::vector<std::size_t> dims, std::uint64_t seed,
                                  std::vector<double> parameters);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t layer_count() const { return dims_.size() - 1; }
  std::size_t input_width() const { return dims_.front(); }
  std::uint64_t seed() const { return seed_; }
  Activation activation(std::size_t layer) const {
    return layer + 1 == layer_count() ? Activation::identity : Activation::relu;
  }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> bias(std::size_t layer);
  std::span<const double> bias(std::size_t layer) const;
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }

  friend bool operator==(const MlpModel&, const MlpModel&) = default;

 private:
  void layout(std::vector<std::size_t> dims);

  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  std::uint64_t seed_ = 0;
};

/// One output per batch row.
std::vector<double> mlp_forward(const MlpModel& model, const DenseMatrix& batch);

/// MSE of the batch and its gradient with respect to every parameter (written into `gradient`).
double mlp_loss_and_gradient(const MlpModel& model, const DenseMatrix& batch,
                             std::span<const double> labels, std::span<double> gradient);

}  // namespace deeprank
