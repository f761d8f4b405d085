#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "zsgan/dataset.hpp"
#include "zsgan/errors.hpp"
#include "zsgan/gan.hpp"
#include "zsgan/matrix.hpp"

namespace zsgan {

/// Multinomial softmax over an explicit class list; the bias is folded in as
/// an appended constant feature, so weights are (d+1) x N.
struct SoftmaxClassifier {
  Matrix weights;
  std::vector<int> class_index_map;  // column -> class id

  std::size_t feature_dim() const { return weights.rows - 1; }
};

enum class SecondStage { prototype_1nn, softmax_retrain };

struct CascadeConfig {
  double entropy_percentile = 50.0;  // 0 disables the second stage entirely
  SecondStage second_stage = SecondStage::prototype_1nn;
  bool anchors_join_references = true;
  std::size_t clf_epochs = 300;
  double clf_lr = 1.0;

  void validate() const {
    if (entropy_percentile < 0.0 || entropy_percentile > 100.0)
      throw ContractError("CascadeConfig: entropy_percentile must lie in [0,100]");
    if (clf_epochs < 1) throw ContractError("CascadeConfig: clf_epochs must be >= 1");
    if (clf_lr <= 0.0) throw ContractError("CascadeConfig: clf_lr must be > 0");
  }
};

namespace detail {

inline Matrix append_ones(const Matrix& x) {
  Matrix out(x.rows, x.cols + 1);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) out(i, j) = x(i, j);
    out(i, x.cols) = 1.0;
  }
  return out;
}

inline Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const double* r = logits.row(i);
    double mx = r[0];
    for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, r[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) denom += std::exp(r[j] - mx);
    double* pr = p.row(i);
    for (std::size_t j = 0; j < logits.cols; ++j) pr[j] = std::exp(r[j] - mx) / denom;
  }
  return p;
}

/// Mean NLL and its weight gradient for the folded-bias parameterization.
inline std::pair<double, Matrix> softmax_nll(const Matrix& aug, const Matrix& weights,
                                             const std::vector<int>& cols) {
  Matrix logits = matmul(aug, weights);
  Matrix probs = softmax_rows(logits);
  const double inv_b = 1.0 / static_cast<double>(aug.rows);
  double loss = 0.0;
  for (std::size_t i = 0; i < aug.rows; ++i) {
    const double p = probs(i, cols[i]);
    loss += -std::log(std::max(p, 1e-300)) * inv_b;
  }
  for (std::size_t i = 0; i < probs.rows; ++i) probs(i, cols[i]) -= 1.0;
  Matrix grad = matmul_at_b(aug, probs);
  for (double& g : grad.data) g *= inv_b;
  return {loss, std::move(grad)};
}

}  // namespace detail

/// Full-batch gradient descent on the mean negative log likelihood. A step
/// that would raise the loss is discarded and the learning rate halved, so
/// the epoch-to-epoch loss never increases. Descent runs on per-dimension
/// standardized features; the standardization is folded back into the
/// returned weights, which act on raw features.
inline SoftmaxClassifier train_softmax(const Matrix& features, const std::vector<int>& labels,
                                       std::size_t epochs, double lr) {
  if (features.rows == 0) throw ContractError("train_softmax: need at least one sample");
  if (features.rows != labels.size()) throw DimensionError("train_softmax: label count mismatch");

  SoftmaxClassifier clf;
  std::set<int> present(labels.begin(), labels.end());
  clf.class_index_map.assign(present.begin(), present.end());
  const std::size_t n_classes = clf.class_index_map.size();
  const std::size_t d = features.cols;

  std::vector<int> cols(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it =
        std::lower_bound(clf.class_index_map.begin(), clf.class_index_map.end(), labels[i]);
    cols[i] = static_cast<int>(it - clf.class_index_map.begin());
  }

  std::vector<double> mean(d, 0.0), scale(d, 0.0);
  const double inv_n = 1.0 / static_cast<double>(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += features(i, j) * inv_n;
  for (std::size_t i = 0; i < features.rows; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = features(i, j) - mean[j];
      scale[j] += c * c * inv_n;
    }
  for (std::size_t j = 0; j < d; ++j) scale[j] = scale[j] > 0.0 ? std::sqrt(scale[j]) : 1.0;

  Matrix standardized(features.rows, d);
  for (std::size_t i = 0; i < features.rows; ++i)
    for (std::size_t j = 0; j < d; ++j)
      standardized(i, j) = (features(i, j) - mean[j]) / scale[j];

  Matrix weights(d + 1, n_classes);
  Matrix aug = detail::append_ones(standardized);
  auto [loss, grad] = detail::softmax_nll(aug, weights, cols);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    Matrix candidate = weights;
    add_inplace(candidate, grad, -lr);
    auto [new_loss, new_grad] = detail::softmax_nll(aug, candidate, cols);
    if (new_loss <= loss) {
      weights = std::move(candidate);
      loss = new_loss;
      grad = std::move(new_grad);
    } else {
      lr *= 0.5;
    }
  }

  // fold the standardization: logits = W'.(x - mu)/s + b'  ==  (W'/s).x + b
  clf.weights = Matrix(d + 1, n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    double bias = weights(d, c);
    for (std::size_t j = 0; j < d; ++j) {
      clf.weights(j, c) = weights(j, c) / scale[j];
      bias -= weights(j, c) * mean[j] / scale[j];
    }
    clf.weights(d, c) = bias;
  }
  return clf;
}

/// Class-posterior rows; each row sums to 1.
inline Matrix predict_proba(const SoftmaxClassifier& clf, const Matrix& features) {
  if (features.cols + 1 != clf.weights.rows)
    throw DimensionError("predict_proba: feature width does not match the classifier");
  return detail::softmax_rows(matmul(detail::append_ones(features), clf.weights));
}

inline std::vector<int> predict_labels(const SoftmaxClassifier& clf, const Matrix& features) {
  Matrix probs = predict_proba(clf, features);
  std::vector<int> out(features.rows);
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const double* r = probs.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < probs.cols; ++j)
      if (r[j] > r[best]) best = j;  // ties keep the lowest class index
    out[i] = clf.class_index_map[best];
  }
  return out;
}

/// Shannon entropy of a probability vector, natural log, 0 log 0 == 0.
inline double entropy(const std::vector<double>& p) {
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0) throw ContractError("entropy: negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw ContractError("entropy: probabilities sum to " + format_double(sum));
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

inline std::vector<double> row_entropies(const Matrix& probs) {
  std::vector<double> out(probs.rows);
  std::vector<double> row(probs.cols);
  for (std::size_t i = 0; i < probs.rows; ++i) {
    for (std::size_t j = 0; j < probs.cols; ++j) row[j] = probs(i, j);
    out[i] = entropy(row);
  }
  return out;
}

/// Low-entropy test rows with their classifier-1 pseudo labels. Every stored
/// entropy is strictly below the threshold.
struct AnchorSet {
  std::vector<std::size_t> rows;
  std::vector<int> pseudo_labels;
  std::vector<double> entropies;

  bool contains(std::size_t row) const {
    return std::find(rows.begin(), rows.end(), row) != rows.end();
  }
};

/// Nearest-rank percentile of the test entropies; anchors are the samples
/// strictly below it. percentile 0 yields an empty anchor set.
inline std::pair<AnchorSet, double> select_anchors(const SoftmaxClassifier& clf,
                                                   const Matrix& test_features,
                                                   const CascadeConfig& cfg) {
  cfg.validate();
  if (test_features.rows == 0) throw ContractError("select_anchors: empty test set");
  Matrix probs = predict_proba(clf, test_features);
  std::vector<double> ent = row_entropies(probs);
  std::vector<double> sorted = ent;
  std::sort(sorted.begin(), sorted.end());

  const std::size_t n = sorted.size();
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(cfg.entropy_percentile / 100.0 * static_cast<double>(n)));
  if (rank > n) rank = n;
  const double threshold = rank == 0 ? sorted.front() : sorted[rank - 1];

  std::vector<int> argmax = predict_labels(clf, test_features);
  AnchorSet anchors;
  for (std::size_t i = 0; i < n; ++i) {
    if (ent[i] < threshold) {
      anchors.rows.push_back(i);
      anchors.pseudo_labels.push_back(argmax[i]);
      anchors.entropies.push_back(ent[i]);
    }
  }
  return {std::move(anchors), threshold};
}

struct CascadeOutput {
  std::vector<int> labels;
  std::vector<double> entropies;  // classifier-1 entropy per test row
  std::vector<char> is_anchor;
  double threshold = 0.0;
};

/// Two-stage prediction: anchors keep their classifier-1 pseudo labels, the
/// remaining rows are labeled by the second stage built on the reference set
/// (plus the anchors, when configured). entropy_percentile 0 switches the
/// second stage off and returns plain classifier-1 argmax.
inline CascadeOutput cascade_predict(const SoftmaxClassifier& clf, const Matrix& test_features,
                                     const Matrix& ref_features, const std::vector<int>& ref_labels,
                                     const CascadeConfig& cfg) {
  cfg.validate();
  if (ref_features.rows != ref_labels.size())
    throw DimensionError("cascade_predict: reference label count mismatch");
  for (int c : clf.class_index_map)
    if (std::find(ref_labels.begin(), ref_labels.end(), c) == ref_labels.end())
      throw ContractError("cascade_predict: no references for class " + std::to_string(c));

  CascadeOutput out;
  out.entropies = row_entropies(predict_proba(clf, test_features));
  out.is_anchor.assign(test_features.rows, 0);
  std::vector<int> argmax = predict_labels(clf, test_features);

  if (cfg.entropy_percentile == 0.0) {
    out.labels = std::move(argmax);
    out.threshold = test_features.rows ? *std::min_element(out.entropies.begin(),
                                                           out.entropies.end())
                                       : 0.0;
    return out;
  }

  auto [anchors, threshold] = select_anchors(clf, test_features, cfg);
  out.threshold = threshold;
  out.labels.assign(test_features.rows, -1);
  for (std::size_t a = 0; a < anchors.rows.size(); ++a) {
    out.labels[anchors.rows[a]] = anchors.pseudo_labels[a];
    out.is_anchor[anchors.rows[a]] = 1;
  }

  Matrix stage2_feats = ref_features;
  std::vector<int> stage2_labels = ref_labels;
  if (cfg.anchors_join_references && !anchors.rows.empty()) {
    Matrix joined(ref_features.rows + anchors.rows.size(), ref_features.cols);
    for (std::size_t i = 0; i < ref_features.rows; ++i)
      for (std::size_t j = 0; j < ref_features.cols; ++j) joined(i, j) = ref_features(i, j);
    for (std::size_t a = 0; a < anchors.rows.size(); ++a) {
      for (std::size_t j = 0; j < ref_features.cols; ++j)
        joined(ref_features.rows + a, j) = test_features(anchors.rows[a], j);
      stage2_labels.push_back(anchors.pseudo_labels[a]);
    }
    stage2_feats = std::move(joined);
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < test_features.rows; ++i)
    if (!out.is_anchor[i]) pending.push_back(i);

  if (!pending.empty()) {
    if (cfg.second_stage == SecondStage::prototype_1nn) {
      const std::vector<int>& classes = clf.class_index_map;
      Matrix prototypes(classes.size(), test_features.cols);
      for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        std::size_t count = 0;
        double* proto = prototypes.row(ci);
        for (std::size_t r = 0; r < stage2_feats.rows; ++r) {
          if (stage2_labels[r] != classes[ci]) continue;
          ++count;
          for (std::size_t j = 0; j < stage2_feats.cols; ++j) proto[j] += stage2_feats(r, j);
        }
        for (std::size_t j = 0; j < stage2_feats.cols; ++j)
          proto[j] /= static_cast<double>(count);
      }
      for (std::size_t i : pending) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_c = 0;
        for (std::size_t ci = 0; ci < classes.size(); ++ci) {
          const double dd =
              squared_distance(test_features.row(i), prototypes.row(ci), test_features.cols);
          if (dd < best) {
            best = dd;
            best_c = ci;
          }
        }
        out.labels[i] = classes[best_c];
      }
    } else {
      SoftmaxClassifier clf2 =
          train_softmax(stage2_feats, stage2_labels, cfg.clf_epochs, cfg.clf_lr);
      Matrix pending_feats = take_rows(test_features, pending);
      std::vector<int> stage2_pred = predict_labels(clf2, pending_feats);
      for (std::size_t i = 0; i < pending.size(); ++i) out.labels[pending[i]] = stage2_pred[i];
    }
  }

  // The cascade never relabels an anchor.
  for (std::size_t a = 0; a < anchors.rows.size(); ++a)
    if (out.labels[anchors.rows[a]] != anchors.pseudo_labels[a])
      throw ContractError("cascade_predict: anchor relabeled");
  return out;
}

struct PredictionResult {
  std::vector<std::size_t> rows;  // dataset row indices, test order
  std::vector<int> truth;
  CascadeOutput cascade;
};

/// Classic ZSL: synthesize unseen-class features, train classifier-1 on them,
/// cascade over the unseen label space only.
inline PredictionResult zsl_predict(const GanModel& model, const Dataset& ds,
                                    const GanConfig& gan_cfg, const CascadeConfig& cascade_cfg,
                                    std::size_t per_class) {
  RngStream rng = RngStream(gan_cfg.seed).derive(0x5a534c);
  auto [synth_feats, synth_labels] =
      synthesize_for_classes(model, ds.class_attributes, ds.unseen_classes, per_class, rng);
  SoftmaxClassifier clf =
      train_softmax(synth_feats, synth_labels, cascade_cfg.clf_epochs, cascade_cfg.clf_lr);

  SplitViews views = split_views(ds);
  PredictionResult res;
  res.rows = views.unseen_test;
  res.truth = labels_at(ds, views.unseen_test);
  Matrix test = take_rows(ds.features, views.unseen_test);
  res.cascade = cascade_predict(clf, test, synth_feats, synth_labels, cascade_cfg);
  return res;
}

/// Generalized ZSL: classifier-1 trained on real seen training features plus
/// synthesized unseen features, cascade over the joint label space, entropy
/// threshold computed jointly over the whole GZSL test set.
inline PredictionResult gzsl_predict(const GanModel& model, const Dataset& ds,
                                     const GanConfig& gan_cfg, const CascadeConfig& cascade_cfg,
                                     std::size_t per_class) {
  RngStream rng = RngStream(gan_cfg.seed).derive(0x5a534c);
  auto [synth_feats, synth_labels] =
      synthesize_for_classes(model, ds.class_attributes, ds.unseen_classes, per_class, rng);

  SplitViews views = split_views(ds);
  Matrix seen_feats = take_rows(ds.features, views.seen_train);
  std::vector<int> seen_labels = labels_at(ds, views.seen_train);

  Matrix train_feats(seen_feats.rows + synth_feats.rows, ds.feature_dim());
  std::vector<int> train_labels;
  train_labels.reserve(train_feats.rows);
  for (std::size_t i = 0; i < seen_feats.rows; ++i) {
    for (std::size_t j = 0; j < ds.feature_dim(); ++j) train_feats(i, j) = seen_feats(i, j);
    train_labels.push_back(seen_labels[i]);
  }
  for (std::size_t i = 0; i < synth_feats.rows; ++i) {
    for (std::size_t j = 0; j < ds.feature_dim(); ++j)
      train_feats(seen_feats.rows + i, j) = synth_feats(i, j);
    train_labels.push_back(synth_labels[i]);
  }

  SoftmaxClassifier clf =
      train_softmax(train_feats, train_labels, cascade_cfg.clf_epochs, cascade_cfg.clf_lr);

  PredictionResult res;
  res.rows = views.gzsl_test;
  res.truth = labels_at(ds, views.gzsl_test);
  Matrix test = take_rows(ds.features, views.gzsl_test);
  res.cascade = cascade_predict(clf, test, train_feats, train_labels, cascade_cfg);
  return res;
}

/// Predictions CSV: row_index, predicted_class, entropy, is_anchor.
inline void write_predictions_csv(const PredictionResult& res, const std::string& path) {
  std::string body = "row_index,predicted_class,entropy,is_anchor\n";
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    body += std::to_string(res.rows[i]) + ',' + std::to_string(res.cascade.labels[i]) + ',' +
            format_double(res.cascade.entropies[i]) + ',' +
            (res.cascade.is_anchor[i] ? '1' : '0');
    body += '\n';
  }
  write_text_file(path, body);
}

}  // namespace zsgan
