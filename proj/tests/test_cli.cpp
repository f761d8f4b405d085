#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>

#include "zsgan/config.hpp"

using namespace zsgan;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ZSGAN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("zsgan_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config parsing round-trips and validates", "[cli]") {
  RunConfig cfg;
  REQUIRE_THROWS_WITH(cfg.set("no_such_key", "1"),
                      Catch::Matchers::ContainsSubstring("no_such_key"));
  REQUIRE_THROWS_AS(cfg.set("epochs", "ten"), ConfigError);
  REQUIRE_THROWS_AS(cfg.set("second_stage", "svm"), ConfigError);

  cfg.set("seed", "17");
  REQUIRE(cfg.synth.seed == 17);
  REQUIRE(cfg.gan.seed == 17);
  cfg.set("second_stage", "softmax_retrain");
  REQUIRE(cfg.cascade.second_stage == SecondStage::softmax_retrain);

  RunConfig parsed = RunConfig::from_string(cfg.to_ini(), "inline");
  REQUIRE(parsed.to_ini() == cfg.to_ini());

  RunConfig commented = RunConfig::from_string("# comment\n\nseed = 3\n epochs =  7 \n", "inline");
  REQUIRE(commented.gan.seed == 3);
  REQUIRE(commented.gan.epochs == 7);

  REQUIRE_THROWS_AS(RunConfig::from_string("seed 3\n", "inline"), ConfigError);
}

TEST_CASE("cli pipeline runs and reruns byte-identically", "[cli][slow]") {
  fs::path dir = fresh_dir("pipeline");
  fs::path cfg_path = dir / "cfg.ini";
  {
    std::ofstream out(cfg_path);
    out << "seed = 5\n"
           "samples_per_class = 15\n"
           "epochs = 12\n"
           "per_class = 20\n"
           "clf_epochs = 60\n"
           "dataset_dir = " << (dir / "data").string() << "\n"
           "checkpoint_path = " << (dir / "run" / "checkpoint.json").string() << "\n"
           "out_dir = " << (dir / "run").string() << "\n";
  }
  const std::string cfg_arg = "--config " + cfg_path.string();

  REQUIRE(run_cli("make-synth " + cfg_arg + " --out " + (dir / "data").string()) == 0);
  REQUIRE(fs::exists(dir / "data" / "features.csv"));
  REQUIRE(fs::exists(dir / "data" / "split.json"));
  REQUIRE(fs::exists(dir / "data" / "config.ini"));

  REQUIRE(run_cli("train " + cfg_arg) == 0);
  REQUIRE(fs::exists(dir / "run" / "checkpoint.json"));
  REQUIRE(fs::exists(dir / "run" / "train_log.csv"));

  REQUIRE(run_cli("predict " + cfg_arg + " --mode zsl") == 0);
  REQUIRE(fs::exists(dir / "run" / "predictions.csv"));
  REQUIRE(fs::exists(dir / "run" / "report.csv"));
  REQUIRE(fs::exists(dir / "run" / "confusion.csv"));

  const std::string predictions = slurp(dir / "run" / "predictions.csv");
  const std::string report = slurp(dir / "run" / "report.csv");
  const std::string log = slurp(dir / "run" / "train_log.csv");
  const std::string ckpt = slurp(dir / "run" / "checkpoint.json");

  // replay every command on the same config
  REQUIRE(run_cli("make-synth " + cfg_arg + " --out " + (dir / "data").string()) == 0);
  REQUIRE(run_cli("train " + cfg_arg) == 0);
  REQUIRE(run_cli("predict " + cfg_arg + " --mode zsl") == 0);
  REQUIRE(slurp(dir / "run" / "predictions.csv") == predictions);
  REQUIRE(slurp(dir / "run" / "report.csv") == report);
  REQUIRE(slurp(dir / "run" / "train_log.csv") == log);
  REQUIRE(slurp(dir / "run" / "checkpoint.json") == ckpt);
}

TEST_CASE("cli rejects unknown config keys with exit code 2", "[cli]") {
  fs::path dir = fresh_dir("badkey");
  fs::path cfg_path = dir / "bad.ini";
  {
    std::ofstream out(cfg_path);
    out << "zeed = 1\n";
  }
  REQUIRE(run_cli("train --config " + cfg_path.string()) == 2);
  REQUIRE(run_cli("nonsense-command --config " + cfg_path.string()) == 2);
  REQUIRE(run_cli("train --config " + (dir / "absent.ini").string()) == 2);
}

TEST_CASE("cli reports module failures with exit code 1", "[cli]") {
  fs::path dir = fresh_dir("modfail");
  fs::path cfg_path = dir / "cfg.ini";
  {
    std::ofstream out(cfg_path);
    out << "dataset_dir = " << (dir / "no_such_dataset").string() << "\n"
        << "out_dir = " << (dir / "run").string() << "\n";
  }
  REQUIRE(run_cli("train --config " + cfg_path.string()) == 1);
}
