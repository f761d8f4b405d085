// Command-line front end: dataset synthesis, GAN training, feature synthesis,
// ZSL/GZSL prediction, ablation and hyperparameter sweeps. Every run is fully
// determined by the config file; each command drops a resolved copy of the
// config next to its outputs so the run can be replayed byte-for-byte.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zsgan/cascade.hpp"
#include "zsgan/config.hpp"
#include "zsgan/dataset.hpp"
#include "zsgan/gan.hpp"
#include "zsgan/metrics.hpp"
#include "zsgan/pipeline.hpp"

namespace fs = std::filesystem;
using namespace zsgan;

namespace {

void ensure_out_dir(const std::string& dir) {
  if (dir.empty()) throw ConfigError("out_dir is not set");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir + ": cannot create output directory");
}

void drop_resolved_config(const RunConfig& cfg, const std::string& dir) {
  write_text_file((fs::path(dir) / "config.ini").string(), cfg.to_ini());
}

Dataset load_configured_dataset(const RunConfig& cfg) {
  if (cfg.dataset_dir.empty()) throw ConfigError("dataset_dir is not set");
  return load_dataset(cfg.dataset_dir);
}

std::string resolve_checkpoint(const RunConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (!cfg.checkpoint_path.empty()) return cfg.checkpoint_path;
  throw ConfigError("checkpoint_path is not set and no --checkpoint was given");
}

int cmd_make_synth(RunConfig cfg, const std::string& out_flag) {
  // default target: wherever the other commands will look for the dataset
  const std::string out =
      !out_flag.empty() ? out_flag : !cfg.dataset_dir.empty() ? cfg.dataset_dir : cfg.out_dir;
  ensure_out_dir(out);
  auto [ds, map] = make_synthetic(cfg.synth);
  write_dataset(ds, out);
  write_csv_matrix((fs::path(out) / "ground_truth_map.csv").string(), map);
  cfg.out_dir = out;
  cfg.dataset_dir = out;
  drop_resolved_config(cfg, out);
  std::cout << "dataset with " << ds.n_total() << " rows over " << ds.class_count()
            << " classes written to " << out << "\n";
  return 0;
}

int cmd_train(RunConfig cfg) {
  ensure_out_dir(cfg.out_dir);
  Dataset ds = load_configured_dataset(cfg);
  TrainedPipeline pipe = train_pipeline(ds, cfg.gan);
  const std::string ckpt = cfg.checkpoint_path.empty()
                               ? (fs::path(cfg.out_dir) / "checkpoint.json").string()
                               : cfg.checkpoint_path;
  save_checkpoint(pipe.model, cfg.gan, ckpt);
  write_train_log_csv(pipe.log, (fs::path(cfg.out_dir) / "train_log.csv").string());
  cfg.checkpoint_path = ckpt;
  drop_resolved_config(cfg, cfg.out_dir);
  std::cout << "trained " << cfg.gan.epochs << " epochs; checkpoint at " << ckpt << "\n";
  return 0;
}

int cmd_synthesize(RunConfig cfg, const std::string& ckpt_flag, std::vector<int> classes,
                   std::size_t per_class_flag) {
  ensure_out_dir(cfg.out_dir);
  Checkpoint ck = load_checkpoint(resolve_checkpoint(cfg, ckpt_flag));
  Dataset ds = load_configured_dataset(cfg);
  if (classes.empty()) classes = ds.unseen_classes;
  const std::size_t per_class = per_class_flag ? per_class_flag : cfg.per_class;

  RngStream rng = RngStream(cfg.gan.seed).derive(0x5a534c);
  auto [feats, labels] =
      synthesize_for_classes(ck.model, ds.class_attributes, classes, per_class, rng);
  write_csv_matrix((fs::path(cfg.out_dir) / "synthesized_features.csv").string(), feats);
  std::string label_body;
  for (int l : labels) label_body += std::to_string(l) + "\n";
  write_text_file((fs::path(cfg.out_dir) / "synthesized_labels.csv").string(), label_body);
  drop_resolved_config(cfg, cfg.out_dir);
  std::cout << "synthesized " << feats.rows << " rows for " << classes.size() << " classes\n";
  return 0;
}

int cmd_predict(RunConfig cfg, const std::string& ckpt_flag, const std::string& mode) {
  ensure_out_dir(cfg.out_dir);
  Checkpoint ck = load_checkpoint(resolve_checkpoint(cfg, ckpt_flag));
  Dataset ds = load_configured_dataset(cfg);

  PredictionResult pred;
  EvalReport report;
  if (mode == "zsl") {
    pred = zsl_predict(ck.model, ds, cfg.gan, cfg.cascade, cfg.per_class);
    report = per_class_top1(pred.cascade.labels, pred.truth, ds.unseen_classes);
  } else if (mode == "gzsl") {
    pred = gzsl_predict(ck.model, ds, cfg.gan, cfg.cascade, cfg.per_class);
    report = gzsl_report(pred.cascade.labels, pred.truth, ds.seen_classes, ds.unseen_classes);
  } else {
    throw ConfigError("mode must be zsl or gzsl, got '" + mode + "'");
  }

  write_predictions_csv(pred, (fs::path(cfg.out_dir) / "predictions.csv").string());
  write_eval_report_csv(report, (fs::path(cfg.out_dir) / "report.csv").string());
  write_confusion_csv(report, (fs::path(cfg.out_dir) / "confusion.csv").string());
  drop_resolved_config(cfg, cfg.out_dir);
  if (report.has_gzsl)
    std::cout << mode << " unseen " << round1(report.unseen_macro) << " seen "
              << round1(report.seen_macro) << " harmonic " << round1(report.harmonic_mean)
              << "\n";
  else
    std::cout << mode << " macro top-1 " << round1(report.macro_accuracy) << "\n";
  return 0;
}

int cmd_ablate(RunConfig cfg) {
  ensure_out_dir(cfg.out_dir);
  Dataset ds = load_configured_dataset(cfg);
  std::vector<AblationRow> rows = run_ablation(ds, cfg.gan, cfg.cascade, cfg.per_class);
  write_ablation_csv(rows, (fs::path(cfg.out_dir) / "ablation.csv").string());
  drop_resolved_config(cfg, cfg.out_dir);
  for (const AblationRow& r : rows)
    std::cout << r.setting << " " << round1(r.zsl_macro) << "\n";
  return 0;
}

int cmd_sweep(RunConfig cfg, const std::string& axis, const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one --values entry");
  ensure_out_dir(cfg.out_dir);
  Dataset ds = load_configured_dataset(cfg);
  std::vector<SweepRow> rows =
      run_sweep(ds, cfg.gan, cfg.cascade, cfg.per_class, sweep_axis_from_string(axis), values);
  write_sweep_csv(rows, axis, (fs::path(cfg.out_dir) / "sweep.csv").string());
  drop_resolved_config(cfg, cfg.out_dir);
  for (const SweepRow& r : rows)
    std::cout << axis << "=" << format_double(r.value) << " zsl " << round1(r.zsl_macro)
              << " gzsl-h " << round1(r.gzsl_harmonic) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot recognition via feature synthesis: conditional WGAN-GP with "
               "per-class soul-sample regularizers and an entropy-gated cascade classifier"};
  app.require_subcommand(1);

  std::string config_path, out_flag, ckpt_flag, mode, axis;
  std::vector<int> classes;
  std::vector<double> values;
  std::size_t per_class_flag = 0;

  CLI::App* make_synth =
      app.add_subcommand("make-synth", "Generate a synthetic dataset with a known map");
  make_synth->add_option("--config", config_path, "run config file")->required();
  make_synth->add_option("--out", out_flag, "output directory (defaults to out_dir)");

  CLI::App* train = app.add_subcommand("train", "Train the conditional WGAN on the seen split");
  train->add_option("--config", config_path, "run config file")->required();

  CLI::App* synthesize =
      app.add_subcommand("synthesize", "Synthesize features from a checkpoint");
  synthesize->add_option("--config", config_path, "run config file")->required();
  synthesize->add_option("--checkpoint", ckpt_flag, "checkpoint file");
  synthesize->add_option("--classes", classes, "class ids (default: the unseen classes)");
  synthesize->add_option("--per-class", per_class_flag, "rows per class (default: per_class)");

  CLI::App* predict = app.add_subcommand("predict", "Classify test samples and emit reports");
  predict->add_option("--config", config_path, "run config file")->required();
  predict->add_option("--checkpoint", ckpt_flag, "checkpoint file");
  predict->add_option("--mode", mode, "zsl or gzsl")->required();

  CLI::App* ablate = app.add_subcommand("ablate", "Run the five-setting ablation table");
  ablate->add_option("--config", config_path, "run config file")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "Sweep one hyperparameter axis");
  sweep->add_option("--config", config_path, "run config file")->required();
  sweep->add_option("--axis", axis,
                    "one of lambda_cls, soul_weight, entropy_percentile, per_class_count, k")
      ->required();
  sweep->add_option("--values", values, "axis values, in output order")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig cfg = RunConfig::from_file(config_path);
    if (make_synth->parsed()) return cmd_make_synth(std::move(cfg), out_flag);
    if (train->parsed()) return cmd_train(std::move(cfg));
    if (synthesize->parsed())
      return cmd_synthesize(std::move(cfg), ckpt_flag, classes, per_class_flag);
    if (predict->parsed()) return cmd_predict(std::move(cfg), ckpt_flag, mode);
    if (ablate->parsed()) return cmd_ablate(std::move(cfg));
    if (sweep->parsed()) return cmd_sweep(std::move(cfg), axis, values);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
