#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "zsgan/errors.hpp"
#include "zsgan/mlp.hpp"

namespace zsgan {

struct AdamHyper {
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  MlpParams first_moment;
  MlpParams second_moment;
  std::int64_t step_count = 0;
  AdamHyper hyper;

  static AdamState init(const MlpSpec& spec, AdamHyper hyper = {}) {
    AdamState s;
    s.first_moment = MlpParams::zeros(spec);
    s.second_moment = MlpParams::zeros(spec);
    s.hyper = hyper;
    return s;
  }
};

namespace detail {

inline void adam_update_span(double* p, double* m, double* v, const double* g, std::size_t n,
                             const AdamHyper& h, double bc1, double bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
    v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    p[i] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
}

}  // namespace detail

/// Bias-corrected Adam update, in place. Throws TrainingError naming the layer
/// if any gradient entry is non-finite.
inline void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state) {
  if (params.layers.size() != grads.layers.size() ||
      params.layers.size() != state.first_moment.layers.size())
    throw DimensionError("adam_step: layer count mismatch");
  for (std::size_t l = 0; l < grads.layers.size(); ++l) {
    if (!all_finite(grads.layers[l].weights))
      throw TrainingError("adam_step: non-finite weight gradient in layer " + std::to_string(l));
    for (double b : grads.layers[l].bias)
      if (!std::isfinite(b))
        throw TrainingError("adam_step: non-finite bias gradient in layer " + std::to_string(l));
  }

  state.step_count += 1;
  const AdamHyper& h = state.hyper;
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step_count));
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    LayerParams& p = params.layers[l];
    const LayerParams& g = grads.layers[l];
    LayerParams& m = state.first_moment.layers[l];
    LayerParams& v = state.second_moment.layers[l];
    if (!p.weights.same_shape(g.weights) || p.bias.size() != g.bias.size())
      throw DimensionError("adam_step: gradient shape mismatch in layer " + std::to_string(l));
    detail::adam_update_span(p.weights.data.data(), m.weights.data.data(),
                             v.weights.data.data(), g.weights.data.data(),
                             p.weights.data.size(), h, bc1, bc2);
    detail::adam_update_span(p.bias.data(), m.bias.data(), v.bias.data(), g.bias.data(),
                             p.bias.size(), h, bc1, bc2);
  }
}

}  // namespace zsgan
