#include "deeprank/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include <fmt/format.h>

#include "deeprank/error.hpp"
#include "deeprank/rng.hpp"
#include "lstm_kernels.hpp"

namespace deeprank {

void LstmModel::layout(std::size_t input_width, std::vector<std::size_t> hidden,
                       std::size_t sequence_length) {
  if (input_width == 0 || hidden.empty() || sequence_length == 0) {
    throw ArgumentError("numerics", "LSTM needs a positive input width, >= 1 layer and >= 1 step");
  }
  for (auto h : hidden) {
    if (h == 0) throw ArgumentError("numerics", "LSTM hidden sizes must be positive");
  }
  input_width_ = input_width;
  hidden_ = std::move(hidden);
  sequence_length_ = sequence_length;
  offsets_.clear();
  std::size_t total = 0;
  for (std::size_t l = 0; l < hidden_.size(); ++l) {
    offsets_.push_back(total);
    const std::size_t nx = layer_input_width(l);
    const std::size_t na = hidden_[l];
    total += nx * 4 * na + na * 4 * na + 4 * na;
  }
  offsets_.push_back(total);
  total += hidden_.back() + 1;
  params_.assign(total, 0.0);
}

LstmModel LstmModel::zeros(std::size_t input_width, std::vector<std::size_t> hidden,
                           std::size_t sequence_length) {
  LstmModel m;
  m.layout(input_width, std::move(hidden), sequence_length);
  return m;
}

LstmModel LstmModel::create(std::size_t input_width, std::vector<std::size_t> hidden,
                            std::size_t sequence_length, std::uint64_t seed) {
  LstmModel m = zeros(input_width, std::move(hidden), sequence_length);
  m.seed_ = seed;
  Rng rng(seed);
  // Glorot per gate matrix: W_gx is n_a x n_x, W_ga is n_a x n_a.
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const std::size_t nx = m.layer_input_width(l);
    const std::size_t na = m.hidden_[l];
    const double lim_x = std::sqrt(6.0 / static_cast<double>(nx + na));
    const double lim_a = std::sqrt(6.0 / static_cast<double>(na + na));
    double* wx = m.params_.data() + m.input_weights_offset(l);
    for (std::size_t i = 0; i < nx * 4 * na; ++i) wx[i] = rng.uniform(-lim_x, lim_x);
    double* wa = m.params_.data() + m.recurrent_weights_offset(l);
    for (std::size_t i = 0; i < na * 4 * na; ++i) wa[i] = rng.uniform(-lim_a, lim_a);
  }
  const double lim_y = std::sqrt(6.0 / static_cast<double>(m.hidden_.back() + 1));
  for (std::size_t j = 0; j < m.hidden_.back(); ++j) m.readout_weight(j) = rng.uniform(-lim_y, lim_y);
  return m;
}

LstmModel LstmModel::from_parameters(std::size_t input_width, std::vector<std::size_t> hidden,
                                     std::size_t sequence_length, std::uint64_t seed,
                                     std::vector<double> parameters) {
  LstmModel m = zeros(input_width, std::move(hidden), sequence_length);
  if (parameters.size() != m.params_.size()) {
    throw ArgumentError("numerics", fmt::format("LSTM expects {} parameters, got {}", m.params_.size(),
                                                parameters.size()));
  }
  m.params_ = std::move(parameters);
  m.seed_ = seed;
  return m;
}

std::size_t LstmModel::recurrent_weights_offset(std::size_t layer) const {
  return offsets_[layer] + layer_input_width(layer) * 4 * hidden_[layer];
}

std::size_t LstmModel::bias_offset(std::size_t layer) const {
  return recurrent_weights_offset(layer) + hidden_[layer] * 4 * hidden_[layer];
}

double& LstmModel::input_weight(std::size_t layer, Gate g, std::size_t unit, std::size_t input) {
  return params_[input_weights_offset(layer) + input * 4 * hidden_[layer] + column(layer, g, unit)];
}
double LstmModel::input_weight(std::size_t layer, Gate g, std::size_t unit, std::size_t input) const {
  return params_[input_weights_offset(layer) + input * 4 * hidden_[layer] + column(layer, g, unit)];
}
double& LstmModel::recurrent_weight(std::size_t layer, Gate g, std::size_t unit, std::size_t from) {
  return params_[recurrent_weights_offset(layer) + from * 4 * hidden_[layer] + column(layer, g, unit)];
}
double LstmModel::recurrent_weight(std::size_t layer, Gate g, std::size_t unit, std::size_t from) const {
  return params_[recurrent_weights_offset(layer) + from * 4 * hidden_[layer] + column(layer, g, unit)];
}
double& LstmModel::gate_bias(std::size_t layer, Gate g, std::size_t unit) {
  return params_[bias_offset(layer) + column(layer, g, unit)];
}
double LstmModel::gate_bias(std::size_t layer, Gate g, std::size_t unit) const {
  return params_[bias_offset(layer) + column(layer, g, unit)];
}

namespace detail {

DEEPRANK_SIMD_CLONES
void project_inputs(const LstmModel& m, std::size_t layer, const double* inputs, double* proj,
                    std::size_t t_begin) {
  const std::size_t nx = m.layer_input_width(layer);
  const std::size_t cols = 4 * m.hidden_sizes()[layer];
  const double* wx = m.parameters().data() + m.input_weights_offset(layer);
  const double* b = m.parameters().data() + m.bias_offset(layer);
  for (std::size_t t = t_begin; t < m.sequence_length(); ++t) {
    double* z = proj + t * cols;
    std::copy(b, b + cols, z);
    const double* x = inputs + t * nx;
    for (std::size_t k = 0; k < nx; ++k) {
      const double xk = x[k];
      if (xk == 0.0) continue;
      const double* w = wx + k * cols;
      for (std::size_t c = 0; c < cols; ++c) z[c] += xk * w[c];
    }
  }
}

DEEPRANK_SIMD_CLONES
void recur(const LstmModel& m, std::size_t layer, const double* proj, std::size_t t_begin,
           double* activations, double* gates, double* cells, double* tanh_cells) {
  const std::size_t na = m.hidden_sizes()[layer];
  const std::size_t cols = 4 * na;
  const std::size_t T = m.sequence_length();
  const double* wa = m.parameters().data() + m.recurrent_weights_offset(layer);
  for (std::size_t t = t_begin; t < T; ++t) {
    double* __restrict z = gates + t * cols;
    std::copy(proj + t * cols, proj + (t + 1) * cols, z);
    if (t > 0) {
      const double* a_prev = activations + (t - 1) * na;
      for (std::size_t i = 0; i < na; ++i) {
        const double ai = a_prev[i];
        const double* __restrict w = wa + i * cols;
        for (std::size_t c = 0; c < cols; ++c) z[c] += ai * w[c];
      }
    }
    for (std::size_t c = 0; c < na; ++c) z[c] = tanh_kernel(z[c]);
    for (std::size_t c = na; c < cols; ++c) z[c] = sigmoid(z[c]);
    double* __restrict cell = cells + t * na;
    double* __restrict tc = tanh_cells + t * na;
    double* __restrict a = activations + t * na;
    const double* c_prev = t > 0 ? cells + (t - 1) * na : nullptr;
    for (std::size_t j = 0; j < na; ++j) {
      cell[j] = z[na + j] * z[j] + (c_prev != nullptr ? z[2 * na + j] * c_prev[j] : 0.0);
    }
    for (std::size_t j = 0; j < na; ++j) tc[j] = tanh_kernel(cell[j]);
    for (std::size_t j = 0; j < na; ++j) a[j] = z[3 * na + j] * tc[j];
  }
}

double readout(const LstmModel& m, const double* last_activation) {
  double z = m.readout_bias();
  const std::size_t na = m.hidden_sizes().back();
  for (std::size_t j = 0; j < na; ++j) z += m.readout_weight(j) * last_activation[j];
  return z;
}

void SampleWorkspace::resize(const LstmModel& m) {
  const std::size_t L = m.layer_count();
  const std::size_t T = m.sequence_length();
  proj.resize(L);
  activations.resize(L);
  gates.resize(L);
  cells.resize(L);
  tanh_cells.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t na = m.hidden_sizes()[l];
    proj[l].resize(T * 4 * na);
    activations[l].resize(T * na);
    gates[l].resize(T * 4 * na);
    cells[l].resize(T * na);
    tanh_cells[l].resize(T * na);
  }
}

void recur(const LstmModel& m, std::size_t layer, std::size_t t_begin, SampleWorkspace& ws) {
  recur(m, layer, ws.proj[layer].data(), t_begin, ws.activations[layer].data(), ws.gates[layer].data(),
        ws.cells[layer].data(), ws.tanh_cells[layer].data());
}

double forward_sample(const LstmModel& m, const double* steps, SampleWorkspace& ws) {
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const double* in = l == 0 ? steps : ws.activations[l - 1].data();
    project_inputs(m, l, in, ws.proj[l].data(), 0);
    recur(m, l, 0, ws);
  }
  const std::size_t na = m.hidden_sizes().back();
  return readout(m, ws.activations.back().data() + (m.sequence_length() - 1) * na);
}

void first_step_unit(const LstmModel& m, std::size_t layer, std::size_t unit, SampleWorkspace& ws) {
  const std::size_t na = m.hidden_sizes()[layer];
  const double* z = ws.proj[layer].data();
  const double cand = tanh_kernel(z[unit]);
  const double gu = sigmoid(z[na + unit]);
  const double gf = sigmoid(z[2 * na + unit]);
  const double go = sigmoid(z[3 * na + unit]);
  double* g = ws.gates[layer].data();
  g[unit] = cand;
  g[na + unit] = gu;
  g[2 * na + unit] = gf;
  g[3 * na + unit] = go;
  const double cell = gu * cand + 0.0;
  ws.cells[layer][unit] = cell;
  ws.tanh_cells[layer][unit] = tanh_kernel(cell);
  ws.activations[layer][unit] = go * ws.tanh_cells[layer][unit];
}

double forward_from(const LstmModel& m, std::size_t layer, std::size_t layer_step, std::size_t upper_step,
                    SampleWorkspace& ws) {
  for (std::size_t l = layer; l < m.layer_count(); ++l) {
    if (l > layer) project_inputs(m, l, ws.activations[l - 1].data(), ws.proj[l].data(), upper_step);
    recur(m, l, l == layer ? layer_step : upper_step, ws);
  }
  const std::size_t na = m.hidden_sizes().back();
  return readout(m, ws.activations.back().data() + (m.sequence_length() - 1) * na);
}

}  // namespace detail

namespace {

void check_batch(const LstmModel& model, const SequenceBatch& batch) {
  if (batch.size() != model.sequence_length()) {
    throw ArgumentError("numerics", fmt::format("LSTM expects {} time steps, got {}",
                                                model.sequence_length(), batch.size()));
  }
  for (const auto& step : batch) {
    if (step.cols() != model.input_width()) {
      throw ArgumentError("numerics", fmt::format("LSTM expects width {}, step has {}",
                                                  model.input_width(), step.cols()));
    }
    if (step.rows() != batch.front().rows()) {
      throw ArgumentError("numerics", "LSTM steps disagree on batch size");
    }
  }
}

// Row-major T x width copy of one sample.
void gather_sample(const SequenceBatch& batch, std::size_t row, std::vector<double>& out) {
  const std::size_t w = batch.front().cols();
  out.resize(batch.size() * w);
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const auto r = batch[t].row(row);
    std::copy(r.begin(), r.end(), out.begin() + static_cast<std::ptrdiff_t>(t * w));
  }
}

}  // namespace

std::vector<double> lstm_forward(const LstmModel& model, const SequenceBatch& batch) {
  check_batch(model, batch);
  const std::size_t n = batch.front().rows();
  std::vector<double> out(n);
  detail::SampleWorkspace ws;
  ws.resize(model);
  std::vector<double> sample;
  for (std::size_t r = 0; r < n; ++r) {
    gather_sample(batch, r, sample);
    out[r] = detail::forward_sample(model, sample.data(), ws);
  }
  return out;
}

double lstm_loss_and_gradient(const LstmModel& model, const SequenceBatch& batch,
                              std::span<const double> labels, std::span<double> gradient) {
  check_batch(model, batch);
  const std::size_t n = batch.front().rows();
  if (labels.size() != n || n == 0) throw ArgumentError("numerics", "labels must match a nonempty batch");
  if (gradient.size() != model.parameter_count()) {
    throw ArgumentError("numerics", "gradient buffer has the wrong size");
  }
  std::fill(gradient.begin(), gradient.end(), 0.0);
  const std::size_t T = model.sequence_length();
  const std::size_t L = model.layer_count();
  const double* params = model.parameters().data();

  detail::SampleWorkspace ws;
  ws.resize(model);
  std::vector<double> sample;
  std::vector<std::vector<double>> d_act(L);  // dLoss/da_t per layer, T x n_a
  for (std::size_t l = 0; l < L; ++l) d_act[l].resize(T * model.hidden_sizes()[l]);
  std::vector<double> dz, da_next, dc_next;
  double loss = 0.0;

  for (std::size_t r = 0; r < n; ++r) {
    gather_sample(batch, r, sample);
    const double z_out = detail::forward_sample(model, sample.data(), ws);
    const double err = z_out - labels[r];
    loss += err * err;
    const double dz_out = 2.0 * err / static_cast<double>(n);

    for (auto& d : d_act) std::fill(d.begin(), d.end(), 0.0);
    const std::size_t n_last = model.hidden_sizes().back();
    const double* a_last = ws.activations.back().data() + (T - 1) * n_last;
    for (std::size_t j = 0; j < n_last; ++j) {
      gradient[model.readout_offset() + j] += dz_out * a_last[j];
      d_act.back()[(T - 1) * n_last + j] = dz_out * model.readout_weight(j);
    }
    gradient[model.parameter_count() - 1] += dz_out;

    for (std::size_t l = L; l-- > 0;) {
      const std::size_t na = model.hidden_sizes()[l];
      const std::size_t nx = model.layer_input_width(l);
      const std::size_t cols = 4 * na;
      const double* wx = params + model.input_weights_offset(l);
      const double* wa = params + model.recurrent_weights_offset(l);
      double* gwx = gradient.data() + model.input_weights_offset(l);
      double* gwa = gradient.data() + model.recurrent_weights_offset(l);
      double* gb = gradient.data() + model.bias_offset(l);
      const double* inputs = l == 0 ? sample.data() : ws.activations[l - 1].data();
      const double* gates = ws.gates[l].data();
      const double* cells = ws.cells[l].data();
      const double* tcells = ws.tanh_cells[l].data();
      const double* acts = ws.activations[l].data();

      dz.assign(cols, 0.0);
      da_next.assign(na, 0.0);
      dc_next.assign(na, 0.0);
      for (std::size_t t = T; t-- > 0;) {
        const double* g = gates + t * cols;
        for (std::size_t j = 0; j < na; ++j) {
          const double cand = g[j], gu = g[na + j], gf = g[2 * na + j], go = g[3 * na + j];
          const double tc = tcells[t * na + j];
          const double c_prev = t > 0 ? cells[(t - 1) * na + j] : 0.0;
          const double da = d_act[l][t * na + j] + da_next[j];
          const double dc = dc_next[j] + da * go * (1.0 - tc * tc);
          dz[3 * na + j] = da * tc * go * (1.0 - go);
          dz[j] = dc * gu * (1.0 - cand * cand);
          dz[na + j] = dc * cand * gu * (1.0 - gu);
          dz[2 * na + j] = dc * c_prev * gf * (1.0 - gf);
          dc_next[j] = dc * gf;
        }
        for (std::size_t c = 0; c < cols; ++c) gb[c] += dz[c];
        const double* x = inputs + t * nx;
        for (std::size_t k = 0; k < nx; ++k) {
          const double xk = x[k];
          double* gw = gwx + k * cols;
          const double* w = wx + k * cols;
          double acc = 0.0;
          for (std::size_t c = 0; c < cols; ++c) {
            gw[c] += xk * dz[c];
            acc += w[c] * dz[c];
          }
          if (l > 0) d_act[l - 1][t * nx + k] += acc;
        }
        std::fill(da_next.begin(), da_next.end(), 0.0);
        if (t > 0) {
          const double* a_prev = acts + (t - 1) * na;
          for (std::size_t i = 0; i < na; ++i) {
            double* gw = gwa + i * cols;
            const double* w = wa + i * cols;
            const double ai = a_prev[i];
            double acc = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
              gw[c] += ai * dz[c];
              acc += w[c] * dz[c];
            }
            da_next[i] = acc;
          }
        }
      }
    }
  }
  return loss / static_cast<double>(n);
}

SequenceBatch select_rows(const SequenceBatch& batch, std::span<const std::size_t> indices) {
  SequenceBatch out;
  out.reserve(batch.size());
  for (const auto& step : batch) out.push_back(step.select_rows(indices));
  return out;
}

}  // namespace deeprank
