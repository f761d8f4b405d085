#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "zsgan/adam.hpp"
#include "zsgan/csv.hpp"
#include "zsgan/errors.hpp"
#include "zsgan/matrix.hpp"
#include "zsgan/mlp.hpp"
#include "zsgan/rng.hpp"
#include "zsgan/souls.hpp"

namespace zsgan {

struct GanConfig {
  std::size_t noise_dim = 0;   // 0: match the attribute width
  std::size_t gen_hidden = 64;
  std::size_t disc_hidden = 64;
  double leaky_slope = 0.2;
  double lambda_cls = 0.01;
  double beta_gp = 10.0;
  double soul_weight = 0.01;
  std::size_t soul_k = 3;
  bool use_r1 = true;
  bool use_r2 = true;
  bool r2_cross_pairs = false;
  bool souls_detached = false;  // log r1/r2 but keep them out of the update
  std::size_t n_critic = 5;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 2e-3;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  std::uint64_t seed = 1;

  void validate() const {
    if (lambda_cls < 0.0 || beta_gp < 0.0 || soul_weight < 0.0)
      throw ContractError("GanConfig: lambda_cls, beta_gp and soul_weight must be >= 0");
    if (n_critic < 1) throw ContractError("GanConfig: n_critic must be >= 1");
    if (batch_size < 1) throw ContractError("GanConfig: batch_size must be >= 1");
    if (soul_k < 1) throw ContractError("GanConfig: soul_k must be >= 1");
    if (gen_hidden < 1 || disc_hidden < 1) throw ContractError("GanConfig: hidden widths must be >= 1");
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
      throw ContractError("GanConfig: leaky_slope must lie in (0,1)");
    if (learning_rate <= 0.0) throw ContractError("GanConfig: learning_rate must be > 0");
  }

  AdamHyper adam() const { return AdamHyper{learning_rate, adam_beta1, adam_beta2, 1e-8}; }
};

/// Conditional WGAN: a generator mapping concat(noise, attributes) to
/// features, and a discriminator trunk on concat(features, attributes) read
/// by two linear heads, one adversarial and one n-way classifier over the
/// seen classes.
struct GanModel {
  MlpSpec gen_spec;
  MlpParams gen;
  MlpSpec trunk_spec;
  MlpParams trunk;
  MlpSpec critic_head_spec;
  MlpParams critic_head;
  MlpSpec cls_head_spec;
  MlpParams cls_head;
  std::vector<int> class_index_map;  // head column -> seen class id
  std::size_t feature_dim = 0;
  std::size_t attr_dim = 0;
  std::size_t noise_dim = 0;

  int column_of(int class_id) const {
    for (std::size_t i = 0; i < class_index_map.size(); ++i)
      if (class_index_map[i] == class_id) return static_cast<int>(i);
    throw ContractError("GanModel: class " + std::to_string(class_id) +
                        " is not covered by the classification head");
  }
};

struct TrainLogEntry {
  double wasserstein_estimate = 0.0;
  double gen_loss = 0.0;
  double disc_loss = 0.0;
  double cls_loss_real = 0.0;
  double cls_loss_fake = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
};
using TrainLog = std::vector<TrainLogEntry>;

inline GanModel init_gan_model(std::size_t feature_dim, std::size_t attr_dim,
                               const std::vector<int>& seen_classes, const GanConfig& cfg,
                               RngStream& rng) {
  cfg.validate();
  GanModel m;
  m.feature_dim = feature_dim;
  m.attr_dim = attr_dim;
  m.noise_dim = cfg.noise_dim ? cfg.noise_dim : attr_dim;
  m.class_index_map = seen_classes;

  m.gen_spec = MlpSpec{{m.noise_dim + attr_dim, cfg.gen_hidden, feature_dim},
                       {leaky_relu_act(cfg.leaky_slope), relu_act()}};
  m.trunk_spec = MlpSpec{{feature_dim + attr_dim, cfg.disc_hidden, cfg.disc_hidden},
                         {leaky_relu_act(cfg.leaky_slope), relu_act()}};
  m.critic_head_spec = MlpSpec{{cfg.disc_hidden, 1}, {linear_act()}};
  m.cls_head_spec = MlpSpec{{cfg.disc_hidden, seen_classes.size()}, {linear_act()}};

  m.gen = MlpParams::he_init(m.gen_spec, rng);
  m.trunk = MlpParams::he_init(m.trunk_spec, rng);
  m.critic_head = MlpParams::he_init(m.critic_head_spec, rng);
  m.cls_head = MlpParams::he_init(m.cls_head_spec, rng);
  return m;
}

namespace detail {

inline std::pair<MlpSpec, MlpParams> compose(const MlpSpec& a, const MlpParams& pa,
                                             const MlpSpec& b, const MlpParams& pb) {
  if (a.output_width() != b.input_width())
    throw DimensionError("compose: trunk output width does not match head input width");
  MlpSpec spec;
  spec.widths = a.widths;
  spec.widths.insert(spec.widths.end(), b.widths.begin() + 1, b.widths.end());
  spec.activations = a.activations;
  spec.activations.insert(spec.activations.end(), b.activations.begin(), b.activations.end());
  MlpParams params;
  params.layers = pa.layers;
  params.layers.insert(params.layers.end(), pb.layers.begin(), pb.layers.end());
  return {std::move(spec), std::move(params)};
}

inline void split_grads(const MlpParams& composed, std::size_t trunk_layers, MlpParams& trunk_out,
                        MlpParams& head_out, double scale = 1.0) {
  for (std::size_t l = 0; l < composed.layers.size(); ++l) {
    MlpParams& dst = l < trunk_layers ? trunk_out : head_out;
    const std::size_t dl = l < trunk_layers ? l : l - trunk_layers;
    add_inplace(dst.layers[dl].weights, composed.layers[l].weights, scale);
    for (std::size_t i = 0; i < composed.layers[l].bias.size(); ++i)
      dst.layers[dl].bias[i] += scale * composed.layers[l].bias[i];
  }
}

struct CeResult {
  double loss = 0.0;
  Matrix dlogits;  // gradient of the mean negative log likelihood
};

inline CeResult softmax_cross_entropy(const Matrix& logits, const std::vector<int>& columns) {
  if (logits.rows != columns.size())
    throw DimensionError("softmax_cross_entropy: label count mismatch");
  CeResult res;
  res.dlogits = Matrix(logits.rows, logits.cols);
  const double inv_b = 1.0 / static_cast<double>(logits.rows);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* r = logits.row(i);
    double mx = r[0];
    for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, r[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) denom += std::exp(r[j] - mx);
    const double log_denom = std::log(denom);
    const int y = columns[i];
    res.loss += -(r[y] - mx - log_denom) * inv_b;
    double* g = res.dlogits.row(i);
    for (std::size_t j = 0; j < logits.cols; ++j)
      g[j] = (std::exp(r[j] - mx) / denom - (static_cast<int>(j) == y ? 1.0 : 0.0)) * inv_b;
  }
  return res;
}

inline std::vector<int> head_columns(const GanModel& model, const std::vector<int>& labels) {
  std::map<int, int> index;
  for (std::size_t i = 0; i < model.class_index_map.size(); ++i)
    index[model.class_index_map[i]] = static_cast<int>(i);
  std::vector<int> cols;
  cols.reserve(labels.size());
  for (int c : labels) {
    auto it = index.find(c);
    if (it == index.end())
      throw ContractError("GanModel: label " + std::to_string(c) + " is not a seen class");
    cols.push_back(it->second);
  }
  return cols;
}

}  // namespace detail

/// Synthesize one feature row per attribute row: fresh z ~ N(0,1), generator
/// input concat(z, a). The generator's final ReLU keeps outputs nonnegative.
inline Matrix generate(const GanModel& model, const Matrix& attributes, RngStream& rng) {
  if (attributes.cols != model.attr_dim)
    throw DimensionError("generate: attribute width mismatch");
  Matrix z = sample_gaussian(rng, attributes.rows, model.noise_dim);
  Matrix input = concat_cols(z, attributes);
  return mlp_forward(model.gen, model.gen_spec, input);
}

struct DiscriminateResult {
  Matrix critic;        // b x 1
  Matrix class_logits;  // b x C_seen
};

inline DiscriminateResult discriminate(const GanModel& model, const Matrix& features,
                                       const Matrix& attributes) {
  if (features.cols != model.feature_dim) throw DimensionError("discriminate: feature width");
  if (attributes.cols != model.attr_dim) throw DimensionError("discriminate: attribute width");
  if (features.rows != attributes.rows) throw DimensionError("discriminate: batch mismatch");
  Matrix trunk_out = mlp_forward(model.trunk, model.trunk_spec, concat_cols(features, attributes));
  DiscriminateResult res;
  res.critic = mlp_forward(model.critic_head, model.critic_head_spec, trunk_out);
  res.class_logits = mlp_forward(model.cls_head, model.cls_head_spec, trunk_out);
  return res;
}

struct GeneratorLossResult {
  double total = 0.0;
  double wasserstein = 0.0;  // -E[D(G(z,a))]
  double cls_ce = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  MlpParams gen_grads;
};

/// Generator objective: -E[D(G(z,a))] + lambda * CE(fake logits) plus the two
/// soul regularizers. Gradients flow into the generator parameters only; the
/// discriminator is treated as a constant.
inline GeneratorLossResult generator_loss(const GanModel& model, const Matrix& batch_attrs,
                                          const std::vector<int>& batch_labels,
                                          const SoulSet& souls, const GanConfig& cfg,
                                          RngStream& rng) {
  cfg.validate();
  if (batch_attrs.rows != batch_labels.size())
    throw DimensionError("generator_loss: label count mismatch");
  const std::size_t b = batch_attrs.rows;
  const std::size_t d = model.feature_dim;

  Matrix z = sample_gaussian(rng, b, model.noise_dim);
  Matrix gen_in = concat_cols(z, batch_attrs);
  Matrix fakes = mlp_forward(model.gen, model.gen_spec, gen_in);

  GeneratorLossResult res;
  Matrix dfakes(b, d);

  {  // adversarial term through the critic head
    auto [spec, params] = detail::compose(model.trunk_spec, model.trunk,
                                          model.critic_head_spec, model.critic_head);
    Matrix cin = concat_cols(fakes, batch_attrs);
    Matrix upstream(b, 1, -1.0 / static_cast<double>(b));
    BackwardResult bw = mlp_backward(params, spec, cin, upstream);
    Matrix critic = mlp_forward(params, spec, cin);
    for (std::size_t i = 0; i < b; ++i) res.wasserstein -= critic(i, 0) / static_cast<double>(b);
    add_inplace(dfakes, slice_cols(bw.input_grads, 0, d));
  }

  {  // supervised classification on the synthesized batch
    auto [spec, params] =
        detail::compose(model.trunk_spec, model.trunk, model.cls_head_spec, model.cls_head);
    Matrix cin = concat_cols(fakes, batch_attrs);
    Matrix logits = mlp_forward(params, spec, cin);
    detail::CeResult ce = detail::softmax_cross_entropy(logits, detail::head_columns(model, batch_labels));
    res.cls_ce = ce.loss;
    if (cfg.lambda_cls > 0.0) {
      BackwardResult bw = mlp_backward(params, spec, cin, ce.dlogits);
      add_inplace(dfakes, slice_cols(bw.input_grads, 0, d), cfg.lambda_cls);
    }
  }

  {  // soul regularizers
    RegLoss r1 = reg_r1(fakes, batch_labels, souls);
    res.r1 = r1.loss;
    FakeSouls fs = fake_souls(fakes, batch_labels, souls);
    SoulRegLoss r2 = reg_r2(fs.souls, souls, cfg.r2_cross_pairs);
    res.r2 = r2.loss;
    const double w1 = (cfg.use_r1 && !cfg.souls_detached) ? cfg.soul_weight : 0.0;
    const double w2 = (cfg.use_r2 && !cfg.souls_detached) ? cfg.soul_weight : 0.0;
    if (w1 > 0.0) add_inplace(dfakes, r1.grads, w1);
    if (w2 > 0.0)
      add_inplace(dfakes, chain_soul_grads_to_rows(r2, fs, fakes, batch_labels), w2);
    res.total = res.wasserstein + cfg.lambda_cls * res.cls_ce + w1 * res.r1 + w2 * res.r2;
  }

  if (!std::isfinite(res.total)) throw TrainingError("generator_loss: non-finite loss");
  res.gen_grads = mlp_backward(model.gen, model.gen_spec, gen_in, dfakes).param_grads;
  return res;
}

struct DiscriminatorGrads {
  MlpParams trunk;
  MlpParams critic_head;
  MlpParams cls_head;
};

struct DiscriminatorLossResult {
  double total = 0.0;
  double critic_gap = 0.0;   // E[D(fake)] - E[D(real)]
  double wasserstein = 0.0;  // E[D(real)] - E[D(fake)]
  double cls_real = 0.0;
  double cls_fake = 0.0;
  double penalty = 0.0;
  DiscriminatorGrads grads;
};

/// Discriminator objective, minimized: critic gap + lambda * (CE on real +
/// CE on fake) + beta * gradient penalty on per-row interpolates, with the
/// penalty norm taken over the feature coordinates only.
inline DiscriminatorLossResult discriminator_loss(const GanModel& model, const Matrix& real_feats,
                                                  const Matrix& attrs,
                                                  const std::vector<int>& labels,
                                                  const GanConfig& cfg, RngStream& rng) {
  cfg.validate();
  const std::size_t b = real_feats.rows;
  if (attrs.rows != b || labels.size() != b)
    throw DimensionError("discriminator_loss: batch size mismatch");
  const std::size_t d = model.feature_dim;
  const double inv_b = 1.0 / static_cast<double>(b);

  Matrix fakes = generate(model, attrs, rng);

  DiscriminatorLossResult res;
  res.grads.trunk = MlpParams::zeros(model.trunk_spec);
  res.grads.critic_head = MlpParams::zeros(model.critic_head_spec);
  res.grads.cls_head = MlpParams::zeros(model.cls_head_spec);
  const std::size_t trunk_layers = model.trunk_spec.layer_count();

  auto [cspec, cparams] = detail::compose(model.trunk_spec, model.trunk,
                                          model.critic_head_spec, model.critic_head);
  {
    Matrix fake_in = concat_cols(fakes, attrs);
    Matrix real_in = concat_cols(real_feats, attrs);
    Matrix critic_fake = mlp_forward(cparams, cspec, fake_in);
    Matrix critic_real = mlp_forward(cparams, cspec, real_in);
    for (std::size_t i = 0; i < b; ++i)
      res.critic_gap += (critic_fake(i, 0) - critic_real(i, 0)) * inv_b;
    res.wasserstein = -res.critic_gap;

    Matrix up_fake(b, 1, inv_b);
    Matrix up_real(b, 1, -inv_b);
    BackwardResult bw_fake = mlp_backward(cparams, cspec, fake_in, up_fake);
    BackwardResult bw_real = mlp_backward(cparams, cspec, real_in, up_real);
    detail::split_grads(bw_fake.param_grads, trunk_layers, res.grads.trunk, res.grads.critic_head);
    detail::split_grads(bw_real.param_grads, trunk_layers, res.grads.trunk, res.grads.critic_head);
  }

  {  // classification branch on both real and fake batches
    auto [spec, params] =
        detail::compose(model.trunk_spec, model.trunk, model.cls_head_spec, model.cls_head);
    const std::vector<int> cols = detail::head_columns(model, labels);
    Matrix real_in = concat_cols(real_feats, attrs);
    Matrix fake_in = concat_cols(fakes, attrs);
    detail::CeResult ce_real = detail::softmax_cross_entropy(mlp_forward(params, spec, real_in), cols);
    detail::CeResult ce_fake = detail::softmax_cross_entropy(mlp_forward(params, spec, fake_in), cols);
    res.cls_real = ce_real.loss;
    res.cls_fake = ce_fake.loss;
    if (cfg.lambda_cls > 0.0) {
      BackwardResult bw_real = mlp_backward(params, spec, real_in, ce_real.dlogits);
      BackwardResult bw_fake = mlp_backward(params, spec, fake_in, ce_fake.dlogits);
      detail::split_grads(bw_real.param_grads, trunk_layers, res.grads.trunk, res.grads.cls_head,
                          cfg.lambda_cls);
      detail::split_grads(bw_fake.param_grads, trunk_layers, res.grads.trunk, res.grads.cls_head,
                          cfg.lambda_cls);
    }
  }

  {  // Lipschitz penalty on x^ = mu x + (1 - mu) G(z,a), fresh mu per row
    std::vector<double> mu = sample_uniform01(rng, b);
    Matrix interp(b, d);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < d; ++j)
        interp(i, j) = mu[i] * real_feats(i, j) + (1.0 - mu[i]) * fakes(i, j);
    Matrix pen_in = concat_cols(interp, attrs);
    auto [g, masks] = grad_input_scalar(cparams, cspec, pen_in);
    res.penalty = gradient_penalty_value(g, d);
    if (cfg.beta_gp > 0.0) {
      MlpParams pgrads = penalty_param_grads(cparams, cspec, pen_in, masks, d);
      detail::split_grads(pgrads, trunk_layers, res.grads.trunk, res.grads.critic_head,
                          cfg.beta_gp);
    }
  }

  res.total = res.critic_gap + cfg.lambda_cls * (res.cls_real + res.cls_fake) +
              cfg.beta_gp * res.penalty;
  if (!std::isfinite(res.total)) throw TrainingError("discriminator_loss: non-finite loss");
  return res;
}

/// Adversarial training on the seen classes: n_critic discriminator updates
/// per generator update, Adam for both players, everything derived from
/// cfg.seed. Returns one log entry per epoch.
inline std::pair<GanModel, TrainLog> train_gan(const Matrix& features,
                                               const std::vector<int>& labels,
                                               const Matrix& class_attributes,
                                               const std::vector<int>& seen_classes,
                                               const SoulSet& souls, const GanConfig& cfg) {
  cfg.validate();
  if (features.rows == 0) throw ContractError("train_gan: empty training set");
  if (features.rows != labels.size()) throw DimensionError("train_gan: label count mismatch");
  for (int c : seen_classes)
    if (!souls.by_class.count(c))
      throw ContractError("train_gan: no souls for seen class " + std::to_string(c));

  RngStream rng(cfg.seed);
  GanModel model = init_gan_model(features.cols, class_attributes.cols, seen_classes, cfg, rng);

  AdamState gen_state = AdamState::init(model.gen_spec, cfg.adam());
  AdamState trunk_state = AdamState::init(model.trunk_spec, cfg.adam());
  AdamState critic_state = AdamState::init(model.critic_head_spec, cfg.adam());
  AdamState cls_state = AdamState::init(model.cls_head_spec, cfg.adam());

  std::vector<std::size_t> index(features.rows);
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;

  TrainLog log;
  log.reserve(cfg.epochs);
  std::size_t critic_steps = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates from the config seed
    for (std::size_t i = index.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_uniform01() * static_cast<double>(i));
      std::swap(index[i - 1], index[j < i ? j : i - 1]);
    }

    TrainLogEntry entry;
    std::size_t disc_count = 0, gen_count = 0;
    try {
      for (std::size_t start = 0; start < index.size(); start += cfg.batch_size) {
        const std::size_t stop = std::min(start + cfg.batch_size, index.size());
        std::vector<std::size_t> batch(index.begin() + start, index.begin() + stop);
        Matrix bf = take_rows(features, batch);
        std::vector<int> bl;
        bl.reserve(batch.size());
        for (std::size_t r : batch) bl.push_back(labels[r]);
        Matrix ba(batch.size(), class_attributes.cols);
        for (std::size_t i = 0; i < batch.size(); ++i)
          for (std::size_t j = 0; j < class_attributes.cols; ++j)
            ba(i, j) = class_attributes(bl[i], j);

        DiscriminatorLossResult dres = discriminator_loss(model, bf, ba, bl, cfg, rng);
        adam_step(model.trunk, dres.grads.trunk, trunk_state);
        adam_step(model.critic_head, dres.grads.critic_head, critic_state);
        adam_step(model.cls_head, dres.grads.cls_head, cls_state);
        entry.wasserstein_estimate += dres.wasserstein;
        entry.disc_loss += dres.total;
        entry.cls_loss_real += dres.cls_real;
        entry.cls_loss_fake += dres.cls_fake;
        ++disc_count;

        if (++critic_steps == cfg.n_critic) {
          critic_steps = 0;
          GeneratorLossResult gres = generator_loss(model, ba, bl, souls, cfg, rng);
          adam_step(model.gen, gres.gen_grads, gen_state);
          entry.gen_loss += gres.total;
          entry.r1 += gres.r1;
          entry.r2 += gres.r2;
          ++gen_count;
        }
      }
    } catch (const TrainingError& e) {
      throw TrainingError("epoch " + std::to_string(epoch) + ": " + e.what());
    }

    if (disc_count) {
      entry.wasserstein_estimate /= static_cast<double>(disc_count);
      entry.disc_loss /= static_cast<double>(disc_count);
      entry.cls_loss_real /= static_cast<double>(disc_count);
      entry.cls_loss_fake /= static_cast<double>(disc_count);
    }
    if (gen_count) {
      entry.gen_loss /= static_cast<double>(gen_count);
      entry.r1 /= static_cast<double>(gen_count);
      entry.r2 /= static_cast<double>(gen_count);
    }
    log.push_back(entry);
  }
  return {std::move(model), std::move(log)};
}

/// per_class fresh rows per class id, labeled accordingly, in class order.
inline std::pair<Matrix, std::vector<int>> synthesize_for_classes(
    const GanModel& model, const Matrix& class_attributes, const std::vector<int>& class_ids,
    std::size_t per_class, RngStream& rng) {
  if (per_class < 1) throw ContractError("synthesize_for_classes: per_class must be >= 1");
  Matrix features(class_ids.size() * per_class, model.feature_dim);
  std::vector<int> labels;
  labels.reserve(features.rows);
  std::size_t row = 0;
  for (int c : class_ids) {
    if (c < 0 || static_cast<std::size_t>(c) >= class_attributes.rows)
      throw ContractError("synthesize_for_classes: unknown class id " + std::to_string(c));
    Matrix attrs(per_class, model.attr_dim);
    for (std::size_t i = 0; i < per_class; ++i)
      for (std::size_t j = 0; j < model.attr_dim; ++j) attrs(i, j) = class_attributes(c, j);
    Matrix gen = generate(model, attrs, rng);
    for (std::size_t i = 0; i < per_class; ++i, ++row) {
      for (std::size_t j = 0; j < model.feature_dim; ++j) features(row, j) = gen(i, j);
      labels.push_back(c);
    }
  }
  return {std::move(features), std::move(labels)};
}

// --- checkpoint serialization -------------------------------------------

namespace detail {

inline nlohmann::json spec_to_json(const MlpSpec& spec) {
  nlohmann::json j;
  j["widths"] = spec.widths;
  nlohmann::json acts = nlohmann::json::array();
  for (const Activation& a : spec.activations) {
    nlohmann::json aj;
    aj["kind"] = a.kind == Act::linear ? "linear" : a.kind == Act::relu ? "relu" : "leaky_relu";
    if (a.kind == Act::leaky_relu) aj["slope"] = a.slope;
    acts.push_back(aj);
  }
  j["activations"] = acts;
  return j;
}

inline MlpSpec spec_from_json(const nlohmann::json& j) {
  MlpSpec spec;
  spec.widths = j.at("widths").get<std::vector<std::size_t>>();
  for (const auto& aj : j.at("activations")) {
    const std::string kind = aj.at("kind").get<std::string>();
    if (kind == "linear")
      spec.activations.push_back(linear_act());
    else if (kind == "relu")
      spec.activations.push_back(relu_act());
    else if (kind == "leaky_relu")
      spec.activations.push_back(leaky_relu_act(aj.at("slope").get<double>()));
    else
      throw LoadError("checkpoint: unknown activation kind '" + kind + "'");
  }
  spec.validate();
  return spec;
}

inline nlohmann::json params_to_json(const MlpParams& p) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerParams& l : p.layers) {
    nlohmann::json lj;
    lj["rows"] = l.weights.rows;
    lj["cols"] = l.weights.cols;
    lj["weights"] = l.weights.data;
    lj["bias"] = l.bias;
    layers.push_back(lj);
  }
  return layers;
}

inline MlpParams params_from_json(const nlohmann::json& j) {
  MlpParams p;
  for (const auto& lj : j) {
    LayerParams l;
    l.weights.rows = lj.at("rows").get<std::size_t>();
    l.weights.cols = lj.at("cols").get<std::size_t>();
    l.weights.data = lj.at("weights").get<std::vector<double>>();
    if (l.weights.data.size() != l.weights.rows * l.weights.cols)
      throw LoadError("checkpoint: weight payload does not match its shape");
    l.bias = lj.at("bias").get<std::vector<double>>();
    p.layers.push_back(std::move(l));
  }
  return p;
}

inline nlohmann::json config_to_json(const GanConfig& c) {
  nlohmann::json j;
  j["noise_dim"] = c.noise_dim;
  j["gen_hidden"] = c.gen_hidden;
  j["disc_hidden"] = c.disc_hidden;
  j["leaky_slope"] = c.leaky_slope;
  j["lambda_cls"] = c.lambda_cls;
  j["beta_gp"] = c.beta_gp;
  j["soul_weight"] = c.soul_weight;
  j["soul_k"] = c.soul_k;
  j["use_r1"] = c.use_r1;
  j["use_r2"] = c.use_r2;
  j["r2_cross_pairs"] = c.r2_cross_pairs;
  j["souls_detached"] = c.souls_detached;
  j["n_critic"] = c.n_critic;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["seed"] = c.seed;
  return j;
}

inline GanConfig config_from_json(const nlohmann::json& j) {
  GanConfig c;
  c.noise_dim = j.at("noise_dim").get<std::size_t>();
  c.gen_hidden = j.at("gen_hidden").get<std::size_t>();
  c.disc_hidden = j.at("disc_hidden").get<std::size_t>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.lambda_cls = j.at("lambda_cls").get<double>();
  c.beta_gp = j.at("beta_gp").get<double>();
  c.soul_weight = j.at("soul_weight").get<double>();
  c.soul_k = j.at("soul_k").get<std::size_t>();
  c.use_r1 = j.at("use_r1").get<bool>();
  c.use_r2 = j.at("use_r2").get<bool>();
  c.r2_cross_pairs = j.at("r2_cross_pairs").get<bool>();
  c.souls_detached = j.at("souls_detached").get<bool>();
  c.n_critic = j.at("n_critic").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace detail

inline void save_checkpoint(const GanModel& model, const GanConfig& cfg, const std::string& path) {
  if (!model.gen.finite() || !model.trunk.finite() || !model.critic_head.finite() ||
      !model.cls_head.finite())
    throw ContractError("save_checkpoint: non-finite parameters");
  nlohmann::json j;
  j["format"] = "zsgan-checkpoint";
  j["version"] = 1;
  j["feature_dim"] = model.feature_dim;
  j["attr_dim"] = model.attr_dim;
  j["noise_dim"] = model.noise_dim;
  j["class_index_map"] = model.class_index_map;
  j["gen_spec"] = detail::spec_to_json(model.gen_spec);
  j["gen"] = detail::params_to_json(model.gen);
  j["trunk_spec"] = detail::spec_to_json(model.trunk_spec);
  j["trunk"] = detail::params_to_json(model.trunk);
  j["critic_head_spec"] = detail::spec_to_json(model.critic_head_spec);
  j["critic_head"] = detail::params_to_json(model.critic_head);
  j["cls_head_spec"] = detail::spec_to_json(model.cls_head_spec);
  j["cls_head"] = detail::params_to_json(model.cls_head);
  j["config"] = detail::config_to_json(cfg);
  write_text_file(path, j.dump(1) + "\n");
}

struct Checkpoint {
  GanModel model;
  GanConfig config;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path + ": cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw LoadError(path + ": invalid JSON: " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "zsgan-checkpoint")
      throw LoadError(path + ": not a checkpoint file");
    if (j.at("version").get<int>() != 1)
      throw LoadError(path + ": unsupported checkpoint version");
    Checkpoint ck;
    ck.model.feature_dim = j.at("feature_dim").get<std::size_t>();
    ck.model.attr_dim = j.at("attr_dim").get<std::size_t>();
    ck.model.noise_dim = j.at("noise_dim").get<std::size_t>();
    ck.model.class_index_map = j.at("class_index_map").get<std::vector<int>>();
    ck.model.gen_spec = detail::spec_from_json(j.at("gen_spec"));
    ck.model.gen = detail::params_from_json(j.at("gen"));
    ck.model.trunk_spec = detail::spec_from_json(j.at("trunk_spec"));
    ck.model.trunk = detail::params_from_json(j.at("trunk"));
    ck.model.critic_head_spec = detail::spec_from_json(j.at("critic_head_spec"));
    ck.model.critic_head = detail::params_from_json(j.at("critic_head"));
    ck.model.cls_head_spec = detail::spec_from_json(j.at("cls_head_spec"));
    ck.model.cls_head = detail::params_from_json(j.at("cls_head"));
    ck.config = detail::config_from_json(j.at("config"));
    require_params_match(ck.model.gen, ck.model.gen_spec);
    require_params_match(ck.model.trunk, ck.model.trunk_spec);
    require_params_match(ck.model.critic_head, ck.model.critic_head_spec);
    require_params_match(ck.model.cls_head, ck.model.cls_head_spec);
    return ck;
  } catch (const LoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoadError(path + ": bad checkpoint payload: " + e.what());
  }
}

inline void write_train_log_csv(const TrainLog& log, const std::string& path) {
  std::string body =
      "epoch,wasserstein_estimate,gen_loss,disc_loss,cls_loss_real,cls_loss_fake,r1,r2\n";
  for (std::size_t e = 0; e < log.size(); ++e) {
    const TrainLogEntry& t = log[e];
    body += std::to_string(e) + ',' + format_double(t.wasserstein_estimate) + ',' +
            format_double(t.gen_loss) + ',' + format_double(t.disc_loss) + ',' +
            format_double(t.cls_loss_real) + ',' + format_double(t.cls_loss_fake) + ',' +
            format_double(t.r1) + ',' + format_double(t.r2) + '\n';
  }
  write_text_file(path, body);
}

}  // namespace zsgan
