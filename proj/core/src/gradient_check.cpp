#include "deeprank/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "deeprank/error.hpp"
#include "lstm_kernels.hpp"

namespace deeprank {

double gradient_relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic) + std::abs(numeric));
}

namespace {

void record(GradientCheckResult& r, std::size_t p, double analytic, double numeric) {
  const double e = gradient_relative_error(analytic, numeric);
  if (e > r.max_relative_error || !std::isfinite(e)) {
    r.max_relative_error = std::isfinite(e) ? e : INFINITY;
    r.worst_parameter = p;
  }
  ++r.parameters_checked;
}

double sq_loss(std::span<const double> out, std::span<const double> labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = out[i] - labels[i];
    s += d * d;
  }
  return s / static_cast<double>(out.size());
}

}  // namespace

GradientCheckResult gradient_check(const MlpModel& model, const DenseMatrix& batch,
                                   std::span<const double> labels, const GradientHook& hook) {
  std::vector<double> grad(model.parameter_count());
  mlp_loss_and_gradient(model, batch, labels, grad);
  if (hook) hook(grad);
  MlpModel probe = model;
  auto params = probe.parameters();
  GradientCheckResult r;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const double saved = params[p];
    params[p] = saved + kGradientCheckStep;
    const double up = sq_loss(mlp_forward(probe, batch), labels);
    params[p] = saved - kGradientCheckStep;
    const double down = sq_loss(mlp_forward(probe, batch), labels);
    params[p] = saved;
    record(r, p, grad[p], (up - down) / (2.0 * kGradientCheckStep));
  }
  return r;
}

// Perturbing a parameter of layer l leaves every layer below l untouched, and an
// input weight or bias moves only one column of that layer's input projection.
// A recurrent weight first acts at step 1, and any other parameter changes a
// single unit at step 0. Each sample therefore keeps its unperturbed forward
// state, and a probe re-runs the network from the perturbed layer and first
// affected step onward.
GradientCheckResult gradient_check(const LstmModel& model, const SequenceBatch& batch,
                                   std::span<const double> labels, const GradientHook& hook) {
  std::vector<double> grad(model.parameter_count());
  lstm_loss_and_gradient(model, batch, labels, grad);
  if (hook) hook(grad);

  const std::size_t n = batch.front().rows();
  const std::size_t T = model.sequence_length();
  const std::size_t L = model.layer_count();

  std::vector<std::vector<double>> samples(n);
  std::vector<detail::SampleWorkspace> base(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t w = model.input_width();
    samples[s].resize(T * w);
    for (std::size_t t = 0; t < T; ++t) {
      const auto row = batch[t].row(s);
      std::copy(row.begin(), row.end(), samples[s].begin() + static_cast<std::ptrdiff_t>(t * w));
    }
    base[s].resize(model);
    detail::forward_sample(model, samples[s].data(), base[s]);
  }
  std::vector<detail::SampleWorkspace> scratch = base;

  LstmModel probe = model;
  auto params = probe.parameters();
  std::vector<double> out(n);
  GradientCheckResult r;

  auto probe_layer = [&](std::size_t l, std::size_t p, double delta) {
    // delta: signed step applied to params[p] (already written into probe).
    const std::size_t nx = model.layer_input_width(l);
    const std::size_t cols = 4 * model.hidden_sizes()[l];
    const std::size_t wx0 = model.input_weights_offset(l);
    const std::size_t wa0 = model.recurrent_weights_offset(l);
    const std::size_t b0 = model.bias_offset(l);
    for (std::size_t s = 0; s < n; ++s) {
      auto& ws = scratch[s];
      std::copy(base[s].proj[l].begin(), base[s].proj[l].end(), ws.proj[l].begin());
      const double* inputs = l == 0 ? samples[s].data() : base[s].activations[l - 1].data();
      if (p < wa0) {
        const std::size_t k = (p - wx0) / cols, c = (p - wx0) % cols;
        for (std::size_t t = 0; t < T; ++t) ws.proj[l][t * cols + c] += delta * inputs[t * nx + k];
      } else if (p >= b0) {
        const std::size_t c = p - b0;
        for (std::size_t t = 0; t < T; ++t) ws.proj[l][t * cols + c] += delta;
      }
      if (p >= wa0 && p < b0) {
        const std::size_t start = T > 1 ? 1 : 0;
        for (std::size_t u = l; u < L && start == 1; ++u) {
          const std::size_t na = model.hidden_sizes()[u];
          std::copy_n(base[s].activations[u].begin(), na, ws.activations[u].begin());
          std::copy_n(base[s].cells[u].begin(), na, ws.cells[u].begin());
        }
        out[s] = detail::forward_from(probe, l, start, start, ws);
      } else {
        const std::size_t na = model.hidden_sizes()[l];
        const std::size_t unit = (p < wa0 ? (p - wx0) % cols : p - b0) % na;
        std::copy_n(base[s].activations[l].begin(), na, ws.activations[l].begin());
        std::copy_n(base[s].cells[l].begin(), na, ws.cells[l].begin());
        detail::first_step_unit(probe, l, unit, ws);
        out[s] = detail::forward_from(probe, l, 1, 0, ws);
      }
    }
    return sq_loss(out, labels);
  };

  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t p = model.layer_begin(l); p < model.layer_begin(l + 1); ++p) {
      const double saved = params[p];
      params[p] = saved + kGradientCheckStep;
      const double up = probe_layer(l, p, params[p] - saved);
      params[p] = saved - kGradientCheckStep;
      const double down = probe_layer(l, p, params[p] - saved);
      params[p] = saved;
      record(r, p, grad[p], (up - down) / (2.0 * kGradientCheckStep));
    }
  }

  const std::size_t na = model.hidden_sizes().back();
  for (std::size_t p = model.readout_offset(); p < model.parameter_count(); ++p) {
    const double saved = params[p];
    double loss[2];
    for (int side = 0; side < 2; ++side) {
      params[p] = saved + (side == 0 ? kGradientCheckStep : -kGradientCheckStep);
      for (std::size_t s = 0; s < n; ++s) {
        out[s] = detail::readout(probe, base[s].activations.back().data() + (T - 1) * na);
      }
      loss[side] = sq_loss(out, labels);
    }
    params[p] = saved;
    record(r, p, grad[p], (loss[0] - loss[1]) / (2.0 * kGradientCheckStep));
  }
  return r;
}

}  // namespace deeprank
