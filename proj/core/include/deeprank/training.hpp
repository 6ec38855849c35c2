#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "deeprank/lstm.hpp"
#include "deeprank/matrix.hpp"
#include "deeprank/mlp.hpp"

namespace deeprank {

/// Mini-batch Adam settings.
struct TrainConfig {
  int epochs = 10;
  int batch_size = 10;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  /// Throws ConfigError on a non-positive epoch count, batch size or learning rate.
  void validate() const;
};

struct EpochLoss {
  int epoch = 0;  // 1-based
  double mse = 0.0;
};

template <typename Model>
struct TrainResult {
  Model model;
  /// Training-set MSE measured after each epoch.
  std::vector<EpochLoss> trace;

  double final_mse() const { return trace.empty() ? 0.0 : trace.back().mse; }
};

/// Adam over shuffled mini-batches; the last partial batch of an epoch is used too.
/// Shuffling depends only on config.seed. Throws TrainingError if the loss stops being finite.
TrainResult<MlpModel> train(MlpModel model, const DenseMatrix& inputs, std::span<const double> labels,
                            const TrainConfig& config);
TrainResult<LstmModel> train(LstmModel model, const SequenceBatch& inputs,
                             std::span<const double> labels, const TrainConfig& config);

}  // namespace deeprank
