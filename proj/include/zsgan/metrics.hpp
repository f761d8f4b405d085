#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "zsgan/cascade.hpp"
#include "zsgan/csv.hpp"
#include "zsgan/dataset.hpp"
#include "zsgan/errors.hpp"
#include "zsgan/matrix.hpp"
#include "zsgan/pipeline.hpp"

namespace zsgan {

struct EvalReport {
  std::vector<int> class_ids;                // confusion row/column order
  std::map<int, double> per_class_accuracy;  // percent, classes present in truth only
  double macro_accuracy = 0.0;
  Matrix confusion;  // counts, truth rows x prediction columns
  // GZSL extras
  bool has_gzsl = false;
  double unseen_macro = 0.0;
  double seen_macro = 0.0;
  double harmonic_mean = 0.0;
};

inline Matrix confusion_matrix(const std::vector<int>& pred, const std::vector<int>& truth,
                               const std::vector<int>& class_ids) {
  if (pred.size() != truth.size()) throw ContractError("confusion_matrix: length mismatch");
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < class_ids.size(); ++i) index[class_ids[i]] = i;
  Matrix m(class_ids.size(), class_ids.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    auto ti = index.find(truth[i]);
    if (ti == index.end())
      throw ContractError("confusion_matrix: true label " + std::to_string(truth[i]) +
                          " not in class_ids");
    auto pi = index.find(pred[i]);
    if (pi == index.end())
      throw ContractError("confusion_matrix: predicted label " + std::to_string(pred[i]) +
                          " not in class_ids");
    m(ti->second, pi->second) += 1.0;
  }
  return m;
}

/// Average per-class top-1 accuracy. Classes absent from the truth vector are
/// excluded from the macro mean.
inline EvalReport per_class_top1(const std::vector<int>& pred, const std::vector<int>& truth,
                                 const std::vector<int>& class_ids) {
  if (pred.size() != truth.size()) throw ContractError("per_class_top1: length mismatch");
  EvalReport rep;
  rep.class_ids = class_ids;
  rep.confusion = confusion_matrix(pred, truth, class_ids);

  std::size_t present = 0;
  for (std::size_t c = 0; c < class_ids.size(); ++c) {
    double count = 0.0;
    for (std::size_t j = 0; j < class_ids.size(); ++j) count += rep.confusion(c, j);
    if (count == 0.0) continue;
    const double acc = rep.confusion(c, c) / count * 100.0;
    rep.per_class_accuracy[class_ids[c]] = acc;
    rep.macro_accuracy += acc;
    ++present;
  }
  if (present) rep.macro_accuracy /= static_cast<double>(present);
  return rep;
}

/// 2US/(U+S), in percent; zero when either side is zero.
inline double harmonic_mean(double unseen, double seen) {
  if (unseen < 0.0 || unseen > 100.0 || seen < 0.0 || seen > 100.0)
    throw ContractError("harmonic_mean: accuracies must lie in [0,100]");
  if (unseen == 0.0 || seen == 0.0) return 0.0;
  return 2.0 * unseen * seen / (unseen + seen);
}

/// GZSL report over the joint label space: per-class accuracies plus the
/// seen/unseen macro means and their harmonic mean.
inline EvalReport gzsl_report(const std::vector<int>& pred, const std::vector<int>& truth,
                              const std::vector<int>& seen_ids,
                              const std::vector<int>& unseen_ids) {
  std::vector<int> joint = seen_ids;
  joint.insert(joint.end(), unseen_ids.begin(), unseen_ids.end());
  std::sort(joint.begin(), joint.end());
  EvalReport rep = per_class_top1(pred, truth, joint);
  rep.has_gzsl = true;

  double seen_sum = 0.0, unseen_sum = 0.0;
  std::size_t seen_n = 0, unseen_n = 0;
  for (int c : seen_ids) {
    auto it = rep.per_class_accuracy.find(c);
    if (it == rep.per_class_accuracy.end()) continue;
    seen_sum += it->second;
    ++seen_n;
  }
  for (int c : unseen_ids) {
    auto it = rep.per_class_accuracy.find(c);
    if (it == rep.per_class_accuracy.end()) continue;
    unseen_sum += it->second;
    ++unseen_n;
  }
  rep.seen_macro = seen_n ? seen_sum / static_cast<double>(seen_n) : 0.0;
  rep.unseen_macro = unseen_n ? unseen_sum / static_cast<double>(unseen_n) : 0.0;
  rep.harmonic_mean = harmonic_mean(rep.unseen_macro, rep.seen_macro);
  return rep;
}

/// Report values are carried at full precision and rounded to one decimal
/// only here, at emission.
inline std::string round1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

inline void write_eval_report_csv(const EvalReport& rep, const std::string& path) {
  std::string body = "metric,value\n";
  body += "macro_accuracy," + round1(rep.macro_accuracy) + "\n";
  if (rep.has_gzsl) {
    body += "unseen_macro," + round1(rep.unseen_macro) + "\n";
    body += "seen_macro," + round1(rep.seen_macro) + "\n";
    body += "harmonic_mean," + round1(rep.harmonic_mean) + "\n";
  }
  for (const auto& [c, acc] : rep.per_class_accuracy)
    body += "class_" + std::to_string(c) + "," + round1(acc) + "\n";
  write_text_file(path, body);
}

inline void write_confusion_csv(const EvalReport& rep, const std::string& path) {
  std::string body;
  for (std::size_t j = 0; j < rep.class_ids.size(); ++j) {
    if (j) body += ',';
    body += std::to_string(rep.class_ids[j]);
  }
  body += '\n';
  for (std::size_t i = 0; i < rep.class_ids.size(); ++i) {
    for (std::size_t j = 0; j < rep.class_ids.size(); ++j) {
      if (j) body += ',';
      body += std::to_string(static_cast<long>(rep.confusion(i, j)));
    }
    body += '\n';
  }
  write_text_file(path, body);
}

// --- ablation and sweeps ---------------------------------------------------

struct AblationRow {
  std::string setting;
  double zsl_macro = 0.0;
};

/// The five incremental settings: plain conditional WGAN, + classification
/// loss, + first soul regularizer, + both regularizers, + cascade. All rows
/// share the seed and training budget of base_cfg.
inline std::vector<AblationRow> run_ablation(const Dataset& ds, const GanConfig& base_cfg,
                                             const CascadeConfig& base_cascade,
                                             std::size_t per_class) {
  struct Setting {
    std::string name;
    double lambda;
    bool r1, r2;
    bool cascade;
  };
  const Setting settings[5] = {
      {"conditional_wgan", 0.0, false, false, false},
      {"plus_cls_loss", base_cfg.lambda_cls, false, false, false},
      {"plus_soul_r1", base_cfg.lambda_cls, true, false, false},
      {"plus_soul_r1_r2", base_cfg.lambda_cls, true, true, false},
      {"plus_cascade", base_cfg.lambda_cls, true, true, true},
  };

  std::vector<AblationRow> rows;
  for (const Setting& s : settings) {
    GanConfig cfg = base_cfg;
    cfg.lambda_cls = s.lambda;
    cfg.use_r1 = s.r1;
    cfg.use_r2 = s.r2;
    CascadeConfig cas = base_cascade;
    if (!s.cascade) cas.entropy_percentile = 0.0;

    TrainedPipeline pipe = train_pipeline(ds, cfg);
    PredictionResult pred = zsl_predict(pipe.model, ds, cfg, cas, per_class);
    EvalReport rep = per_class_top1(pred.cascade.labels, pred.truth, ds.unseen_classes);
    rows.push_back({s.name, rep.macro_accuracy});
  }
  return rows;
}

inline void write_ablation_csv(const std::vector<AblationRow>& rows, const std::string& path) {
  std::string body = "setting,zsl_macro\n";
  for (const AblationRow& r : rows) body += r.setting + ',' + format_double(r.zsl_macro) + '\n';
  write_text_file(path, body);
}

enum class SweepAxis { lambda_cls, soul_weight, entropy_percentile, per_class_count, k };

inline SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "lambda_cls") return SweepAxis::lambda_cls;
  if (s == "soul_weight") return SweepAxis::soul_weight;
  if (s == "entropy_percentile") return SweepAxis::entropy_percentile;
  if (s == "per_class_count") return SweepAxis::per_class_count;
  if (s == "k") return SweepAxis::k;
  throw ContractError("unknown sweep axis '" + s + "'");
}

struct SweepRow {
  double value = 0.0;
  double zsl_macro = 0.0;
  double gzsl_unseen = 0.0;
  double gzsl_seen = 0.0;
  double gzsl_harmonic = 0.0;
};

/// One full ZSL + GZSL evaluation per axis value, rows in input order.
/// Axes that only affect prediction reuse a single trained model.
inline std::vector<SweepRow> run_sweep(const Dataset& ds, const GanConfig& base_cfg,
                                       const CascadeConfig& base_cascade, std::size_t per_class,
                                       SweepAxis axis, const std::vector<double>& values) {
  const bool training_axis = axis == SweepAxis::lambda_cls || axis == SweepAxis::soul_weight ||
                             axis == SweepAxis::k;
  TrainedPipeline shared;
  if (!training_axis && !values.empty()) shared = train_pipeline(ds, base_cfg);

  std::vector<SweepRow> rows;
  for (double v : values) {
    GanConfig cfg = base_cfg;
    CascadeConfig cas = base_cascade;
    std::size_t pc = per_class;
    switch (axis) {
      case SweepAxis::lambda_cls: cfg.lambda_cls = v; break;
      case SweepAxis::soul_weight: cfg.soul_weight = v; break;
      case SweepAxis::entropy_percentile: cas.entropy_percentile = v; break;
      case SweepAxis::per_class_count:
        pc = static_cast<std::size_t>(v);
        if (pc < 1) throw ContractError("run_sweep: per_class_count values must be >= 1");
        break;
      case SweepAxis::k:
        cfg.soul_k = static_cast<std::size_t>(v);
        if (cfg.soul_k < 1) throw ContractError("run_sweep: k values must be >= 1");
        break;
    }

    const TrainedPipeline& pipe = training_axis ? (shared = train_pipeline(ds, cfg)) : shared;
    PredictionResult zsl = zsl_predict(pipe.model, ds, cfg, cas, pc);
    EvalReport zrep = per_class_top1(zsl.cascade.labels, zsl.truth, ds.unseen_classes);
    PredictionResult gzsl = gzsl_predict(pipe.model, ds, cfg, cas, pc);
    EvalReport grep =
        gzsl_report(gzsl.cascade.labels, gzsl.truth, ds.seen_classes, ds.unseen_classes);

    SweepRow row;
    row.value = v;
    row.zsl_macro = zrep.macro_accuracy;
    row.gzsl_unseen = grep.unseen_macro;
    row.gzsl_seen = grep.seen_macro;
    row.gzsl_harmonic = grep.harmonic_mean;
    rows.push_back(row);
  }
  return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& axis,
                            const std::string& path) {
  std::string body = axis + ",zsl_macro,gzsl_unseen,gzsl_seen,gzsl_harmonic\n";
  for (const SweepRow& r : rows)
    body += format_double(r.value) + ',' + format_double(r.zsl_macro) + ',' +
            format_double(r.gzsl_unseen) + ',' + format_double(r.gzsl_seen) + ',' +
            format_double(r.gzsl_harmonic) + '\n';
  write_text_file(path, body);
}

}  // namespace zsgan
