#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "zsgan/metrics.hpp"

using namespace zsgan;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

SynthConfig micro_synth() {
  SynthConfig sc;
  sc.feature_dim = 6;
  sc.attr_dim = 4;
  sc.n_seen_classes = 3;
  sc.n_unseen_classes = 2;
  sc.samples_per_class = 10;
  return sc;
}

GanConfig micro_gan(std::uint64_t seed = 1) {
  GanConfig cfg;
  cfg.seed = seed;
  cfg.epochs = 4;
  cfg.gen_hidden = 8;
  cfg.disc_hidden = 8;
  cfg.batch_size = 8;
  return cfg;
}

}  // namespace

TEST_CASE("all-correct predictions score 100 everywhere", "[metrics]") {
  std::vector<int> truth = {0, 1, 2, 0, 1};
  EvalReport rep = per_class_top1(truth, truth, {0, 1, 2});
  REQUIRE(rep.macro_accuracy == 100.0);
  for (const auto& [c, acc] : rep.per_class_accuracy) REQUIRE(acc == 100.0);
}

TEST_CASE("macro averages per-class accuracies, not samples", "[metrics]") {
  // class 0: 2 of 4 correct; class 1: 1 of 1
  std::vector<int> truth = {0, 0, 0, 0, 1};
  std::vector<int> pred = {0, 0, 1, 1, 1};
  EvalReport rep = per_class_top1(pred, truth, {0, 1});
  REQUIRE(rep.per_class_accuracy.at(0) == Catch::Approx(50.0));
  REQUIRE(rep.per_class_accuracy.at(1) == Catch::Approx(100.0));
  REQUIRE(rep.macro_accuracy == Catch::Approx(75.0));
}

TEST_CASE("macro and micro disagree on imbalanced data, both match counting", "[metrics]") {
  RngStream rng(7);
  std::vector<int> truth, pred;
  // class 0: 90 samples, 45 correct; class 1: 10 samples, 10 correct
  for (int i = 0; i < 90; ++i) {
    truth.push_back(0);
    pred.push_back(i < 45 ? 0 : 1);
  }
  for (int i = 0; i < 10; ++i) {
    truth.push_back(1);
    pred.push_back(1);
  }
  EvalReport rep = per_class_top1(pred, truth, {0, 1});
  // brute-force counting oracle
  std::size_t c0 = 0, c1 = 0, correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 0 && pred[i] == 0) ++c0;
    if (truth[i] == 1 && pred[i] == 1) ++c1;
    if (truth[i] == pred[i]) ++correct;
  }
  const double macro = (100.0 * c0 / 90.0 + 100.0 * c1 / 10.0) / 2.0;
  const double micro = 100.0 * correct / 100.0;
  REQUIRE(rep.macro_accuracy == Catch::Approx(macro));
  REQUIRE(macro != micro);
}

TEST_CASE("classes absent from the truth are left out of the macro", "[metrics]") {
  std::vector<int> truth = {0, 0};
  std::vector<int> pred = {0, 1};
  EvalReport rep = per_class_top1(pred, truth, {0, 1, 2});
  REQUIRE(rep.per_class_accuracy.count(2) == 0);
  REQUIRE(rep.macro_accuracy == Catch::Approx(50.0));
}

TEST_CASE("macro is invariant under consistent class relabeling", "[metrics]") {
  std::vector<int> truth = {0, 1, 2, 2, 1, 0, 0};
  std::vector<int> pred = {0, 2, 2, 1, 1, 0, 1};
  EvalReport base = per_class_top1(pred, truth, {0, 1, 2});

  auto remap = [](int c) { return c == 0 ? 7 : c == 1 ? 3 : 5; };
  std::vector<int> truth2, pred2;
  for (int c : truth) truth2.push_back(remap(c));
  for (int c : pred) pred2.push_back(remap(c));
  EvalReport moved = per_class_top1(pred2, truth2, {7, 3, 5});
  REQUIRE(moved.macro_accuracy == Catch::Approx(base.macro_accuracy).margin(1e-12));
}

TEST_CASE("harmonic mean identities", "[metrics]") {
  REQUIRE(harmonic_mean(50.0, 50.0) == Catch::Approx(50.0).margin(1e-12));
  REQUIRE(harmonic_mean(0.0, 80.0) == 0.0);
  REQUIRE(harmonic_mean(80.0, 0.0) == 0.0);
  RngStream rng(3);
  for (int i = 0; i < 20; ++i) {
    const double u = 100.0 * rng.next_uniform01();
    const double s = 100.0 * rng.next_uniform01();
    REQUIRE(harmonic_mean(u, s) == Catch::Approx(harmonic_mean(s, u)).margin(1e-12));
    REQUIRE(harmonic_mean(u, u) == Catch::Approx(u).margin(1e-12));
    if (u > 0.0 && s > 0.0) {
      // bounded between the minimum and the geometric mean
      REQUIRE(harmonic_mean(u, s) >= std::min(u, s) - 1e-12);
      REQUIRE(harmonic_mean(u, s) <= std::sqrt(u * s) + 1e-12);
    }
  }
}

TEST_CASE("harmonic mean reproduces the published GZSL arithmetic", "[metrics]") {
  // independently computed 2US/(U+S)
  REQUIRE(harmonic_mean(52.6, 76.3) ==
          Catch::Approx(2.0 * 52.6 * 76.3 / (52.6 + 76.3)).margin(1e-12));
  REQUIRE(harmonic_mean(52.6, 76.3) == Catch::Approx(62.3).margin(0.05));
  REQUIRE(harmonic_mean(46.5, 57.9) == Catch::Approx(51.6).margin(0.05));
  REQUIRE(harmonic_mean(57.7, 83.8) == Catch::Approx(68.3).margin(0.05));
  REQUIRE(harmonic_mean(34.3, 68.2) ==
          Catch::Approx(2.0 * 34.3 * 68.2 / (34.3 + 68.2)).margin(1e-12));
}

TEST_CASE("confusion matrix counts are exact", "[metrics]") {
  SECTION("all correct is diagonal") {
    std::vector<int> truth = {0, 1, 1, 2};
    Matrix m = confusion_matrix(truth, truth, {0, 1, 2});
    REQUIRE(m(0, 0) == 1.0);
    REQUIRE(m(1, 1) == 2.0);
    REQUIRE(m(2, 2) == 1.0);
    REQUIRE(m(0, 1) + m(0, 2) + m(1, 0) + m(1, 2) + m(2, 0) + m(2, 1) == 0.0);
  }
  SECTION("single sample lights one cell") {
    Matrix m = confusion_matrix({2}, {0}, {0, 1, 2});
    REQUIRE(m(0, 2) == 1.0);
    double total = 0.0;
    for (double v : m.data) total += v;
    REQUIRE(total == 1.0);
  }
  SECTION("random fixture versus brute-force counting") {
    RngStream rng(9);
    std::vector<int> truth, pred;
    for (int i = 0; i < 200; ++i) {
      truth.push_back(static_cast<int>(rng.next_uniform01() * 4) % 4);
      pred.push_back(static_cast<int>(rng.next_uniform01() * 4) % 4);
    }
    Matrix m = confusion_matrix(pred, truth, {0, 1, 2, 3});
    for (int a = 0; a < 4; ++a) {
      // row sums reproduce per-class counts
      double row = 0.0, count = 0.0;
      for (int b = 0; b < 4; ++b) {
        double cell = 0.0;
        for (std::size_t i = 0; i < truth.size(); ++i)
          if (truth[i] == a && pred[i] == b) cell += 1.0;
        REQUIRE(m(a, b) == cell);
        row += m(a, b);
      }
      for (std::size_t i = 0; i < truth.size(); ++i) count += truth[i] == a ? 1.0 : 0.0;
      REQUIRE(row == count);
    }
  }
}

TEST_CASE("gzsl report combines the two macro means", "[metrics]") {
  std::vector<int> truth = {0, 0, 5, 5};
  std::vector<int> pred = {0, 5, 5, 5};
  EvalReport rep = gzsl_report(pred, truth, {0}, {5});
  REQUIRE(rep.seen_macro == Catch::Approx(50.0));
  REQUIRE(rep.unseen_macro == Catch::Approx(100.0));
  REQUIRE(rep.harmonic_mean == Catch::Approx(harmonic_mean(100.0, 50.0)).margin(1e-12));
}

TEST_CASE("training on an empty seen split is a contract error", "[metrics]") {
  auto [ds, map] = make_synthetic(micro_synth());
  for (std::size_t i = 0; i < ds.n_total(); ++i)
    if (ds.is_seen(ds.labels[i])) ds.gzsl_test_seen_rows.push_back(i);
  REQUIRE_THROWS_AS(train_pipeline(ds, micro_gan()), ContractError);
}

TEST_CASE("ablation emits exactly the five settings", "[metrics][slow]") {
  auto [ds, map] = make_synthetic(micro_synth());
  GanConfig cfg = micro_gan();
  CascadeConfig cas;
  cas.clf_epochs = 40;
  std::vector<AblationRow> rows = run_ablation(ds, cfg, cas, 10);
  REQUIRE(rows.size() == 5);
  REQUIRE(rows[0].setting == "conditional_wgan");
  REQUIRE(rows[4].setting == "plus_cascade");

  // setting 1 equals a manual run with the same switches off
  GanConfig plain = cfg;
  plain.lambda_cls = 0.0;
  plain.use_r1 = false;
  plain.use_r2 = false;
  CascadeConfig plain_cas = cas;
  plain_cas.entropy_percentile = 0.0;
  TrainedPipeline pipe = train_pipeline(ds, plain);
  PredictionResult pred = zsl_predict(pipe.model, ds, plain, plain_cas, 10);
  EvalReport rep = per_class_top1(pred.cascade.labels, pred.truth, ds.unseen_classes);
  REQUIRE(rows[0].zsl_macro == rep.macro_accuracy);
}

TEST_CASE("single-value sweep equals a single run, values echo in order", "[metrics][slow]") {
  auto [ds, map] = make_synthetic(micro_synth());
  GanConfig cfg = micro_gan();
  CascadeConfig cas;
  cas.clf_epochs = 40;

  std::vector<SweepRow> one = run_sweep(ds, cfg, cas, 10, SweepAxis::lambda_cls, {cfg.lambda_cls});
  REQUIRE(one.size() == 1);
  TrainedPipeline pipe = train_pipeline(ds, cfg);
  PredictionResult pred = zsl_predict(pipe.model, ds, cfg, cas, 10);
  EvalReport rep = per_class_top1(pred.cascade.labels, pred.truth, ds.unseen_classes);
  REQUIRE(one[0].zsl_macro == rep.macro_accuracy);

  std::vector<SweepRow> multi =
      run_sweep(ds, cfg, cas, 10, SweepAxis::entropy_percentile, {75.0, 25.0, 50.0});
  REQUIRE(multi.size() == 3);
  REQUIRE(multi[0].value == 75.0);
  REQUIRE(multi[1].value == 25.0);
  REQUIRE(multi[2].value == 50.0);
}

TEST_CASE("report writers are deterministic byte for byte", "[metrics]") {
  namespace fs = std::filesystem;
  std::vector<int> truth = {0, 1, 1, 2, 2, 2};
  std::vector<int> pred = {0, 1, 2, 2, 0, 2};
  EvalReport rep = gzsl_report(pred, truth, {0, 1}, {2});

  const std::string a = (fs::temp_directory_path() / "zsgan_rep_a.csv").string();
  const std::string b = (fs::temp_directory_path() / "zsgan_rep_b.csv").string();
  write_eval_report_csv(rep, a);
  write_eval_report_csv(rep, b);
  REQUIRE(slurp(a) == slurp(b));
  REQUIRE(slurp(a).find("harmonic_mean") != std::string::npos);

  write_confusion_csv(rep, a);
  write_confusion_csv(rep, b);
  REQUIRE(slurp(a) == slurp(b));
  // header row carries the class ids
  REQUIRE(slurp(a).substr(0, 6) == "0,1,2\n");
}
