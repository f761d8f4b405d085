#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "zsgan/cascade.hpp"
#include "zsgan/csv.hpp"
#include "zsgan/dataset.hpp"
#include "zsgan/errors.hpp"
#include "zsgan/gan.hpp"

namespace zsgan {

/// Bad key, bad value or malformed config file; the CLI maps this to a usage
/// error (exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

/// Flat key=value run configuration mirroring SynthConfig + GanConfig +
/// CascadeConfig plus paths. Unknown keys are rejected. One seed feeds every
/// random stream in the run.
struct RunConfig {
  SynthConfig synth;
  GanConfig gan;
  CascadeConfig cascade;
  std::size_t per_class = 100;
  std::string dataset_dir;
  std::string checkpoint_path;
  std::string out_dir;

  void set(const std::string& key, const std::string& value);
  std::string to_ini() const;

  static RunConfig from_string(const std::string& text, const std::string& origin);
  static RunConfig from_file(const std::string& path);
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline double config_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config value for '" + key + "' is not a number: '" + v + "'");
  }
}

inline std::uint64_t config_count(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long n = std::stoll(v, &pos);
    if (pos != v.size() || n < 0) throw std::invalid_argument(v);
    return static_cast<std::uint64_t>(n);
  } catch (const std::exception&) {
    throw ConfigError("config value for '" + key + "' is not a nonnegative integer: '" + v + "'");
  }
}

inline bool config_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config value for '" + key + "' is not a boolean: '" + v + "'");
}

}  // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& value) {
  using detail::config_bool;
  using detail::config_count;
  using detail::config_double;
  if (key == "seed") {
    synth.seed = config_count(key, value);
    gan.seed = synth.seed;
  } else if (key == "feature_dim") {
    synth.feature_dim = config_count(key, value);
  } else if (key == "attr_dim") {
    synth.attr_dim = config_count(key, value);
  } else if (key == "seen_classes") {
    synth.n_seen_classes = config_count(key, value);
  } else if (key == "unseen_classes") {
    synth.n_unseen_classes = config_count(key, value);
  } else if (key == "samples_per_class") {
    synth.samples_per_class = config_count(key, value);
  } else if (key == "noise_sigma") {
    synth.noise_sigma = config_double(key, value);
  } else if (key == "noise_dim") {
    gan.noise_dim = config_count(key, value);
  } else if (key == "gen_hidden") {
    gan.gen_hidden = config_count(key, value);
  } else if (key == "disc_hidden") {
    gan.disc_hidden = config_count(key, value);
  } else if (key == "leaky_slope") {
    gan.leaky_slope = config_double(key, value);
  } else if (key == "lambda_cls") {
    gan.lambda_cls = config_double(key, value);
  } else if (key == "beta_gp") {
    gan.beta_gp = config_double(key, value);
  } else if (key == "soul_weight") {
    gan.soul_weight = config_double(key, value);
  } else if (key == "soul_k") {
    gan.soul_k = config_count(key, value);
  } else if (key == "use_r1") {
    gan.use_r1 = config_bool(key, value);
  } else if (key == "use_r2") {
    gan.use_r2 = config_bool(key, value);
  } else if (key == "r2_cross_pairs") {
    gan.r2_cross_pairs = config_bool(key, value);
  } else if (key == "souls_detached") {
    gan.souls_detached = config_bool(key, value);
  } else if (key == "n_critic") {
    gan.n_critic = config_count(key, value);
  } else if (key == "epochs") {
    gan.epochs = config_count(key, value);
  } else if (key == "batch_size") {
    gan.batch_size = config_count(key, value);
  } else if (key == "learning_rate") {
    gan.learning_rate = config_double(key, value);
  } else if (key == "adam_beta1") {
    gan.adam_beta1 = config_double(key, value);
  } else if (key == "adam_beta2") {
    gan.adam_beta2 = config_double(key, value);
  } else if (key == "entropy_percentile") {
    cascade.entropy_percentile = config_double(key, value);
  } else if (key == "second_stage") {
    if (value == "prototype_1nn")
      cascade.second_stage = SecondStage::prototype_1nn;
    else if (value == "softmax_retrain")
      cascade.second_stage = SecondStage::softmax_retrain;
    else
      throw ConfigError("config value for 'second_stage' must be prototype_1nn or "
                        "softmax_retrain, got '" +
                        value + "'");
  } else if (key == "anchors_join_references") {
    cascade.anchors_join_references = config_bool(key, value);
  } else if (key == "clf_epochs") {
    cascade.clf_epochs = config_count(key, value);
  } else if (key == "clf_lr") {
    cascade.clf_lr = config_double(key, value);
  } else if (key == "per_class") {
    per_class = config_count(key, value);
  } else if (key == "dataset_dir") {
    dataset_dir = value;
  } else if (key == "checkpoint_path") {
    checkpoint_path = value;
  } else if (key == "out_dir") {
    out_dir = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

inline std::string RunConfig::to_ini() const {
  std::string s;
  s += "seed = " + std::to_string(synth.seed) + "\n";
  s += "feature_dim = " + std::to_string(synth.feature_dim) + "\n";
  s += "attr_dim = " + std::to_string(synth.attr_dim) + "\n";
  s += "seen_classes = " + std::to_string(synth.n_seen_classes) + "\n";
  s += "unseen_classes = " + std::to_string(synth.n_unseen_classes) + "\n";
  s += "samples_per_class = " + std::to_string(synth.samples_per_class) + "\n";
  s += "noise_sigma = " + format_double(synth.noise_sigma) + "\n";
  s += "noise_dim = " + std::to_string(gan.noise_dim) + "\n";
  s += "gen_hidden = " + std::to_string(gan.gen_hidden) + "\n";
  s += "disc_hidden = " + std::to_string(gan.disc_hidden) + "\n";
  s += "leaky_slope = " + format_double(gan.leaky_slope) + "\n";
  s += "lambda_cls = " + format_double(gan.lambda_cls) + "\n";
  s += "beta_gp = " + format_double(gan.beta_gp) + "\n";
  s += "soul_weight = " + format_double(gan.soul_weight) + "\n";
  s += "soul_k = " + std::to_string(gan.soul_k) + "\n";
  s += std::string("use_r1 = ") + (gan.use_r1 ? "true" : "false") + "\n";
  s += std::string("use_r2 = ") + (gan.use_r2 ? "true" : "false") + "\n";
  s += std::string("r2_cross_pairs = ") + (gan.r2_cross_pairs ? "true" : "false") + "\n";
  s += std::string("souls_detached = ") + (gan.souls_detached ? "true" : "false") + "\n";
  s += "n_critic = " + std::to_string(gan.n_critic) + "\n";
  s += "epochs = " + std::to_string(gan.epochs) + "\n";
  s += "batch_size = " + std::to_string(gan.batch_size) + "\n";
  s += "learning_rate = " + format_double(gan.learning_rate) + "\n";
  s += "adam_beta1 = " + format_double(gan.adam_beta1) + "\n";
  s += "adam_beta2 = " + format_double(gan.adam_beta2) + "\n";
  s += "entropy_percentile = " + format_double(cascade.entropy_percentile) + "\n";
  s += std::string("second_stage = ") +
       (cascade.second_stage == SecondStage::prototype_1nn ? "prototype_1nn"
                                                           : "softmax_retrain") +
       "\n";
  s += std::string("anchors_join_references = ") +
       (cascade.anchors_join_references ? "true" : "false") + "\n";
  s += "clf_epochs = " + std::to_string(cascade.clf_epochs) + "\n";
  s += "clf_lr = " + format_double(cascade.clf_lr) + "\n";
  s += "per_class = " + std::to_string(per_class) + "\n";
  s += "dataset_dir = " + dataset_dir + "\n";
  s += "checkpoint_path = " + checkpoint_path + "\n";
  s += "out_dir = " + out_dir + "\n";
  return s;
}

inline RunConfig RunConfig::from_string(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    cfg.set(key, value);
  }
  return cfg;
}

inline RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_string(text, path);
}

}  // namespace zsgan
