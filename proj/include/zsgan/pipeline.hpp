#pragma once

#include <utility>

#include "zsgan/dataset.hpp"
#include "zsgan/gan.hpp"
#include "zsgan/souls.hpp"

namespace zsgan {

struct TrainedPipeline {
  GanModel model;
  TrainLog log;
  SoulSet souls;
};

/// Soul computation plus adversarial training on the dataset's seen split.
/// Real souls are computed once up front; the features never change.
inline TrainedPipeline train_pipeline(const Dataset& ds, const GanConfig& cfg) {
  SplitViews views = split_views(ds);
  if (views.seen_train.empty()) throw ContractError("train_pipeline: empty seen training split");
  Matrix feats = take_rows(ds.features, views.seen_train);
  std::vector<int> labels = labels_at(ds, views.seen_train);

  RngStream soul_rng = RngStream(cfg.seed).derive(0x534f554c);
  TrainedPipeline out;
  out.souls = real_souls(feats, labels, ds.seen_classes, cfg.soul_k, soul_rng);
  auto [model, log] =
      train_gan(feats, labels, ds.class_attributes, ds.seen_classes, out.souls, cfg);
  out.model = std::move(model);
  out.log = std::move(log);
  return out;
}

}  // namespace zsgan
