#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "zsgan/errors.hpp"
#include "zsgan/matrix.hpp"
#include "zsgan/rng.hpp"

namespace zsgan {

enum class Act { linear, relu, leaky_relu };

struct Activation {
  Act kind = Act::linear;
  double slope = 0.0;  // leaky_relu only
};

inline Activation linear_act() { return {Act::linear, 0.0}; }
inline Activation relu_act() { return {Act::relu, 0.0}; }
inline Activation leaky_relu_act(double slope) { return {Act::leaky_relu, slope}; }

/// Layer widths (input first) plus one activation per non-input layer.
struct MlpSpec {
  std::vector<std::size_t> widths;
  std::vector<Activation> activations;

  std::size_t layer_count() const { return activations.size(); }
  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }

  void validate() const {
    if (widths.size() < 2) throw ContractError("MlpSpec: need at least two widths");
    if (activations.size() + 1 != widths.size())
      throw ContractError("MlpSpec: need one activation per non-input layer");
    for (std::size_t w : widths)
      if (w == 0) throw ContractError("MlpSpec: zero layer width");
    for (const Activation& a : activations)
      if (a.kind == Act::leaky_relu && !(a.slope > 0.0 && a.slope < 1.0))
        throw ContractError("MlpSpec: leaky_relu slope must lie in (0,1)");
  }
};

struct LayerParams {
  Matrix weights;            // in x out
  std::vector<double> bias;  // out
};

struct MlpParams {
  std::vector<LayerParams> layers;

  static MlpParams zeros(const MlpSpec& spec) {
    MlpParams p;
    p.layers.resize(spec.layer_count());
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
      p.layers[l].weights = Matrix(spec.widths[l], spec.widths[l + 1]);
      p.layers[l].bias.assign(spec.widths[l + 1], 0.0);
    }
    return p;
  }

  /// He-style init: N(0, sqrt(2/fan_in)) weights, zero biases.
  static MlpParams he_init(const MlpSpec& spec, RngStream& rng) {
    MlpParams p = zeros(spec);
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
      const double scale = std::sqrt(2.0 / static_cast<double>(spec.widths[l]));
      for (double& w : p.layers[l].weights.data) w = scale * rng.next_gaussian();
    }
    return p;
  }

  bool finite() const {
    for (const LayerParams& l : layers) {
      if (!all_finite(l.weights)) return false;
      for (double b : l.bias)
        if (!std::isfinite(b)) return false;
    }
    return true;
  }
};

inline void require_params_match(const MlpParams& params, const MlpSpec& spec) {
  if (params.layers.size() != spec.layer_count())
    throw DimensionError("MlpParams: layer count does not match spec");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const LayerParams& lp = params.layers[l];
    if (lp.weights.rows != spec.widths[l] || lp.weights.cols != spec.widths[l + 1] ||
        lp.bias.size() != spec.widths[l + 1])
      throw DimensionError("MlpParams: layer " + std::to_string(l) + " shape mismatch");
  }
}

inline double apply_activation(const Activation& a, double z) {
  switch (a.kind) {
    case Act::linear: return z;
    case Act::relu: return z > 0.0 ? z : 0.0;
    case Act::leaky_relu: return z > 0.0 ? z : a.slope * z;
  }
  return z;
}

// Subgradient at a kink (pre-activation exactly 0): 0 for relu, slope for leaky_relu.
inline double activation_multiplier(const Activation& a, double z) {
  switch (a.kind) {
    case Act::linear: return 1.0;
    case Act::relu: return z > 0.0 ? 1.0 : 0.0;
    case Act::leaky_relu: return z > 0.0 ? 1.0 : a.slope;
  }
  return 1.0;
}

struct ForwardCache {
  std::vector<Matrix> pre;   // pre-activation per layer
  std::vector<Matrix> post;  // post[0] = input, post[l+1] = layer l output
};

inline Matrix affine(const LayerParams& p, const Matrix& x) {
  Matrix y = matmul(x, p.weights);
  for (std::size_t i = 0; i < y.rows; ++i) {
    double* r = y.row(i);
    for (std::size_t j = 0; j < y.cols; ++j) r[j] += p.bias[j];
  }
  return y;
}

inline ForwardCache mlp_forward_cached(const MlpParams& params, const MlpSpec& spec,
                                       const Matrix& input) {
  spec.validate();
  require_params_match(params, spec);
  if (input.cols != spec.input_width())
    throw DimensionError("mlp_forward: input width " + std::to_string(input.cols) +
                         " does not match spec width " + std::to_string(spec.input_width()));
  ForwardCache cache;
  cache.post.push_back(input);
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    Matrix z = affine(params.layers[l], cache.post.back());
    Matrix h(z.rows, z.cols);
    for (std::size_t i = 0; i < z.data.size(); ++i)
      h.data[i] = apply_activation(spec.activations[l], z.data[i]);
    cache.pre.push_back(std::move(z));
    cache.post.push_back(std::move(h));
  }
  return cache;
}

inline Matrix mlp_forward(const MlpParams& params, const MlpSpec& spec, const Matrix& input) {
  return mlp_forward_cached(params, spec, input).post.back();
}

struct BackwardResult {
  MlpParams param_grads;
  Matrix input_grads;
};

/// Exact reverse-mode gradients of sum(output .* upstream) with respect to
/// every parameter and to the input.
inline BackwardResult mlp_backward(const MlpParams& params, const MlpSpec& spec,
                                   const Matrix& input, const Matrix& upstream) {
  ForwardCache cache = mlp_forward_cached(params, spec, input);
  if (upstream.rows != input.rows || upstream.cols != spec.output_width())
    throw DimensionError("mlp_backward: upstream shape mismatch");

  BackwardResult out;
  out.param_grads = MlpParams::zeros(spec);
  Matrix delta = upstream;  // d/d(post_l), starting at the output
  for (std::size_t li = spec.layer_count(); li-- > 0;) {
    const Matrix& pre = cache.pre[li];
    Matrix dpre(delta.rows, delta.cols);
    for (std::size_t i = 0; i < delta.data.size(); ++i)
      dpre.data[i] = delta.data[i] * activation_multiplier(spec.activations[li], pre.data[i]);

    out.param_grads.layers[li].weights = matmul_at_b(cache.post[li], dpre);
    std::vector<double>& bg = out.param_grads.layers[li].bias;
    for (std::size_t i = 0; i < dpre.rows; ++i) {
      const double* r = dpre.row(i);
      for (std::size_t j = 0; j < dpre.cols; ++j) bg[j] += r[j];
    }
    delta = matmul_a_bt(dpre, params.layers[li].weights);
  }
  out.input_grads = std::move(delta);
  return out;
}

/// Per-layer derivative multipliers (the active linear regime of each unit).
struct ActivationMasks {
  std::vector<Matrix> mult;  // layer l: batch x widths[l+1]
};

/// Gradient of a scalar-output net with respect to each input row, plus the
/// activation masks met along the way.
inline std::pair<Matrix, ActivationMasks> grad_input_scalar(const MlpParams& params,
                                                            const MlpSpec& spec,
                                                            const Matrix& x) {
  if (spec.output_width() != 1)
    throw ContractError("grad_input_scalar: output width must be 1");
  ForwardCache cache = mlp_forward_cached(params, spec, x);

  ActivationMasks masks;
  masks.mult.reserve(spec.layer_count());
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const Matrix& pre = cache.pre[l];
    Matrix m(pre.rows, pre.cols);
    for (std::size_t i = 0; i < pre.data.size(); ++i)
      m.data[i] = activation_multiplier(spec.activations[l], pre.data[i]);
    masks.mult.push_back(std::move(m));
  }

  Matrix delta(x.rows, 1, 1.0);
  for (std::size_t li = spec.layer_count(); li-- > 0;) {
    Matrix dpre(delta.rows, delta.cols);
    for (std::size_t i = 0; i < delta.data.size(); ++i)
      dpre.data[i] = delta.data[i] * masks.mult[li].data[i];
    delta = matmul_a_bt(dpre, params.layers[li].weights);
  }
  return {std::move(delta), std::move(masks)};
}

inline void require_masks_match(const ActivationMasks& masks, const MlpSpec& spec,
                                std::size_t batch) {
  if (masks.mult.size() != spec.layer_count())
    throw ContractError("penalty_param_grads: stale masks (layer count)");
  for (std::size_t l = 0; l < masks.mult.size(); ++l)
    if (masks.mult[l].rows != batch || masks.mult[l].cols != spec.widths[l + 1])
      throw ContractError("penalty_param_grads: stale masks (layer " + std::to_string(l) + ")");
}

/// Gradient-penalty value for a scalar critic: mean over rows of
/// (||grad restricted to the first norm_dims input coords|| - 1)^2.
inline double gradient_penalty_value(const Matrix& input_grads, std::size_t norm_dims) {
  if (norm_dims == 0 || norm_dims > input_grads.cols)
    throw ContractError("gradient penalty: norm_dims out of range");
  double acc = 0.0;
  for (std::size_t i = 0; i < input_grads.rows; ++i) {
    double sq = 0.0;
    const double* r = input_grads.row(i);
    for (std::size_t j = 0; j < norm_dims; ++j) sq += r[j] * r[j];
    const double gap = std::sqrt(sq) - 1.0;
    acc += gap * gap;
  }
  return acc / static_cast<double>(input_grads.rows);
}

/// Parameter gradients of the gradient penalty with the activation masks held
/// fixed. Exact almost everywhere for piecewise-linear nets; with frozen masks
/// the input gradient does not depend on the biases, so bias grads are zero.
inline MlpParams penalty_param_grads(const MlpParams& params, const MlpSpec& spec,
                                     const Matrix& x, const ActivationMasks& masks,
                                     std::size_t norm_dims = 0) {
  if (spec.output_width() != 1)
    throw ContractError("penalty_param_grads: output width must be 1");
  spec.validate();
  require_params_match(params, spec);
  if (x.cols != spec.input_width())
    throw DimensionError("penalty_param_grads: input width mismatch");
  const std::size_t batch = x.rows;
  require_masks_match(masks, spec, batch);
  if (norm_dims == 0) norm_dims = spec.input_width();
  if (norm_dims > spec.input_width())
    throw ContractError("penalty_param_grads: norm_dims exceeds input width");

  const std::size_t L = spec.layer_count();
  MlpParams grads = MlpParams::zeros(spec);

  // With masks frozen the critic is row-wise linear, so the input gradient of
  // row i is the chain  W~_0 ... W~_{L-1}  with  W~_l = W_l * diag(mask_l[i]).
  // suffix[l] = W~_{l+1} ... W~_{L-1} (column), prefix[l] = u * W~_0 ... W~_{l-1}.
  std::vector<std::vector<double>> suffix(L);
  for (std::size_t i = 0; i < batch; ++i) {
    std::vector<double> cur(1, 1.0);  // output width is 1
    for (std::size_t li = L; li-- > 0;) {
      suffix[li] = cur;  // size widths[li+1]
      const Matrix& w = params.layers[li].weights;
      const double* m = masks.mult[li].row(i);
      std::vector<double> nxt(spec.widths[li], 0.0);
      for (std::size_t a = 0; a < w.rows; ++a) {
        const double* wr = w.row(a);
        double s = 0.0;
        for (std::size_t b = 0; b < w.cols; ++b) s += wr[b] * m[b] * cur[b];
        nxt[a] = s;
      }
      cur = std::move(nxt);
    }
    // cur is now the input gradient g_i.
    double sq = 0.0;
    for (std::size_t j = 0; j < norm_dims; ++j) sq += cur[j] * cur[j];
    const double norm = std::sqrt(sq);

    // d penalty_i / d g_i ; subgradient 0 when the norm vanishes.
    std::vector<double> u(spec.input_width(), 0.0);
    if (norm > 0.0) {
      const double coef = 2.0 * (norm - 1.0) / (norm * static_cast<double>(batch));
      for (std::size_t j = 0; j < norm_dims; ++j) u[j] = coef * cur[j];
    }

    std::vector<double> prefix = u;  // size widths[0]
    for (std::size_t li = 0; li < L; ++li) {
      const Matrix& w = params.layers[li].weights;
      const double* m = masks.mult[li].row(i);
      Matrix& gw = grads.layers[li].weights;
      for (std::size_t a = 0; a < w.rows; ++a) {
        if (prefix[a] == 0.0) continue;
        double* gr = gw.row(a);
        for (std::size_t b = 0; b < w.cols; ++b)
          gr[b] += prefix[a] * m[b] * suffix[li][b];
      }
      std::vector<double> nxt(w.cols, 0.0);
      for (std::size_t a = 0; a < w.rows; ++a) {
        if (prefix[a] == 0.0) continue;
        const double* wr = w.row(a);
        for (std::size_t b = 0; b < w.cols; ++b) nxt[b] += prefix[a] * wr[b];
      }
      for (std::size_t b = 0; b < w.cols; ++b) nxt[b] *= m[b];
      prefix = std::move(nxt);
    }
  }
  return grads;
}

}  // namespace zsgan
