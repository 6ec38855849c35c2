#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "deeprank/matrix.hpp"

namespace deeprank {

/// One matrix per time step, each batch x input_width.
using SequenceBatch = std::vector<DenseMatrix>;

/// LSTM gate blocks. Each step of a layer computes
///   candidate c~ = tanh(W_ca a_{t-1} + W_cx x_t + b_c)
///   update    Gu = sigmoid(W_ua a_{t-1} + W_ux x_t + b_u)
///   forget    Gf = sigmoid(W_fa a_{t-1} + W_fx x_t + b_f)
///   output    Go = sigmoid(W_oa a_{t-1} + W_ox x_t + b_o)
///   c_t = Gu * c~ + Gf * c_{t-1},  a_t = Go * tanh(c_t)
/// with a_0 = c_0 = 0. A plain RNN is the special case without c and gates.
enum class Gate : std::size_t { candidate = 0, update = 1, forget = 2, output = 3 };

inline constexpr std::size_t kDefaultSequenceLength = 3;
inline const std::vector<std::size_t> kDefaultLstmHidden = {32, 16, 8};

/// Stacked LSTM: every layer but the last feeds its full output sequence to the next;
/// the last layer's final activation a_T goes through an affine read-out to a scalar.
///
/// Parameter layout per layer (n_x inputs, n_a units, column = gate * n_a + unit):
/// input weights n_x x 4 n_a, recurrent weights n_a x 4 n_a, bias 4 n_a.
/// The read-out (n_a of the last layer, then one bias) closes the flat vector.
class LstmModel {
 public:
  LstmModel() = default;

  static LstmModel create(std::size_t input_width, std::vector<std::size_t> hidden,
                          std::size_t sequence_length, std::uint64_t seed);
  static LstmModel zeros(std::size_t input_width, std::vector<std::size_t> hidden,
                         std::size_t sequence_length);
  /// Rebuilds a model from a stored parameter vector; throws ArgumentError on a size mismatch.
  static LstmModel from_parameters(std::size_t input_width, std::vector<std::size_t> hidden,
                                   std::size_t sequence_length, std::uint64_t seed,
                                   std::vector<double> parameters);

  std::size_t input_width() const { return input_width_; }
  const std::vector<std::size_t>& hidden_sizes() const { return hidden_; }
  std::size_t layer_count() const { return hidden_.size(); }
  std::size_t sequence_length() const { return sequence_length_; }
  std::uint64_t seed() const { return seed_; }
  /// Width of the inputs consumed by a layer.
  std::size_t layer_input_width(std::size_t layer) const {
    return layer == 0 ? input_width_ : hidden_[layer - 1];
  }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::size_t input_weights_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t recurrent_weights_offset(std::size_t layer) const;
  std::size_t bias_offset(std::size_t layer) const;
  std::size_t readout_offset() const { return offsets_.back(); }
  /// First parameter index belonging to `layer` (layer_count() = read-out).
  std::size_t layer_begin(std::size_t layer) const { return offsets_[layer]; }

  double& input_weight(std::size_t layer, Gate g, std::size_t unit, std::size_t input);
  double input_weight(std::size_t layer, Gate g, std::size_t unit, std::size_t input) const;
  double& recurrent_weight(std::size_t layer, Gate g, std::size_t unit, std::size_t from_unit);
  double recurrent_weight(std::size_t layer, Gate g, std::size_t unit, std::size_t from_unit) const;
  double& gate_bias(std::size_t layer, Gate g, std::size_t unit);
  double gate_bias(std::size_t layer, Gate g, std::size_t unit) const;
  double& readout_weight(std::size_t unit) { return params_[readout_offset() + unit]; }
  double readout_weight(std::size_t unit) const { return params_[readout_offset() + unit]; }
  double& readout_bias() { return params_.back(); }
  double readout_bias() const { return params_.back(); }

  friend bool operator==(const LstmModel&, const LstmModel&) = default;

 private:
  void layout(std::size_t input_width, std::vector<std::size_t> hidden, std::size_t sequence_length);
  std::size_t column(std::size_t layer, Gate g, std::size_t unit) const {
    return static_cast<std::size_t>(g) * hidden_[layer] + unit;
  }

  std::size_t input_width_ = 0;
  std::vector<std::size_t> hidden_;
  std::size_t sequence_length_ = 0;
  std::vector<std::size_t> offsets_;  // per layer, then read-out
  std::vector<double> params_;
  std::uint64_t seed_ = 0;
};

/// Z_out per batch row.
std::vector<double> lstm_forward(const LstmModel& model, const SequenceBatch& batch);

/// MSE of the batch and its gradient (back-propagation through time) into `gradient`.
double lstm_loss_and_gradient(const LstmModel& model, const SequenceBatch& batch,
                              std::span<const double> labels, std::span<double> gradient);

/// Rows `indices` of every step.
SequenceBatch select_rows(const SequenceBatch& batch, std::span<const std::size_t> indices);

}  // namespace deeprank
