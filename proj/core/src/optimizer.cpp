#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "deeprank/error.hpp"
#include "deeprank/least_squares.hpp"
#include "deeprank/rng.hpp"
#include "deeprank/training.hpp"

namespace deeprank {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("numerics", fmt::format("epochs must be >= 1, got {}", epochs));
  if (batch_size < 1) throw ConfigError("numerics", fmt::format("batch_size must be >= 1, got {}", batch_size));
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("numerics", fmt::format("learning_rate must be > 0, got {}", learning_rate));
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("numerics", "moment decay rates must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("numerics", "epsilon must be > 0");
}

namespace {

class Adam {
 public:
  Adam(std::size_t n, const TrainConfig& c) : config_(c), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad) {
    ++t_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, t_);
    const double c2 = 1.0 - std::pow(b2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
      const double mhat = m_[i] / c1;
      const double vhat = v_[i] / c2;
      params[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }

 private:
  TrainConfig config_;
  std::vector<double> m_, v_;
  int t_ = 0;
};

void check_labels(std::span<const double> labels, std::size_t rows) {
  if (rows == 0) throw ArgumentError("numerics", "training needs at least one sample");
  if (labels.size() != rows) {
    throw ArgumentError("numerics", fmt::format("{} labels for {} samples", labels.size(), rows));
  }
  for (double y : labels) {
    if (!std::isfinite(y)) throw ArgumentError("numerics", "training labels must be finite");
  }
}

struct MlpOps {
  static std::size_t rows(const DenseMatrix& x) { return x.rows(); }
  static DenseMatrix subset(const DenseMatrix& x, std::span<const std::size_t> idx) { return x.select_rows(idx); }
  static bool finite(const DenseMatrix& x) { return x.all_finite(); }
  static double loss_and_gradient(const MlpModel& m, const DenseMatrix& x, std::span<const double> y,
                                  std::span<double> g) {
    return mlp_loss_and_gradient(m, x, y, g);
  }
  static std::vector<double> forward(const MlpModel& m, const DenseMatrix& x) { return mlp_forward(m, x); }
};

struct LstmOps {
  static std::size_t rows(const SequenceBatch& x) { return x.empty() ? 0 : x.front().rows(); }
  static SequenceBatch subset(const SequenceBatch& x, std::span<const std::size_t> idx) {
    return select_rows(x, idx);
  }
  static bool finite(const SequenceBatch& x) {
    for (const auto& step : x) {
      if (!step.all_finite()) return false;
    }
    return true;
  }
  static double loss_and_gradient(const LstmModel& m, const SequenceBatch& x, std::span<const double> y,
                                  std::span<double> g) {
    return lstm_loss_and_gradient(m, x, y, g);
  }
  static std::vector<double> forward(const LstmModel& m, const SequenceBatch& x) { return lstm_forward(m, x); }
};

template <typename Ops, typename Model, typename Inputs>
TrainResult<Model> run(Model model, const Inputs& inputs, std::span<const double> labels,
                       const TrainConfig& config) {
  config.validate();
  const std::size_t n = Ops::rows(inputs);
  check_labels(labels, n);
  if (!Ops::finite(inputs)) throw ArgumentError("numerics", "training inputs must be finite");

  Rng rng(config.seed);
  Adam adam(model.parameter_count(), config);
  std::vector<double> grad(model.parameter_count());
  std::vector<std::size_t> order(n);
  std::vector<double> batch_labels;
  const auto bs = static_cast<std::size_t>(config.batch_size);

  TrainResult<Model> result;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t stop = std::min(n, start + bs);
      std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Inputs batch = Ops::subset(inputs, idx);
      batch_labels.clear();
      for (auto i : idx) batch_labels.push_back(labels[i]);
      const double loss = Ops::loss_and_gradient(model, batch, batch_labels, grad);
      if (!std::isfinite(loss)) throw TrainingError(epoch, "mini-batch loss is not finite");
      adam.step(model.parameters(), grad);
    }
    const double epoch_mse = mse(Ops::forward(model, inputs), labels);
    if (!std::isfinite(epoch_mse)) throw TrainingError(epoch, "training loss is not finite");
    result.trace.push_back({epoch, epoch_mse});
  }
  result.model = std::move(model);
  return result;
}

}  // namespace

TrainResult<MlpModel> train(MlpModel model, const DenseMatrix& inputs, std::span<const double> labels,
                            const TrainConfig& config) {
  if (inputs.cols() != model.input_width()) {
    throw ArgumentError("numerics", fmt::format("inputs have width {}, model expects {}", inputs.cols(),
                                                model.input_width()));
  }
  return run<MlpOps>(std::move(model), inputs, labels, config);
}

TrainResult<LstmModel> train(LstmModel model, const SequenceBatch& inputs, std::span<const double> labels,
                             const TrainConfig& config) {
  return run<LstmOps>(std::move(model), inputs, labels, config);
}

}  // namespace deeprank
