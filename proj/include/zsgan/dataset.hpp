#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "zsgan/csv.hpp"
#include "zsgan/errors.hpp"
#include "zsgan/matrix.hpp"
#include "zsgan/rng.hpp"

namespace zsgan {

/// Feature matrix with per-sample labels, per-class attribute vectors and the
/// seen/unseen class split. Labels are 0-based class ids.
struct Dataset {
  Matrix features;          // n_total x d
  std::vector<int> labels;  // n_total
  Matrix class_attributes;  // C_total x m
  std::vector<int> seen_classes;
  std::vector<int> unseen_classes;
  std::vector<std::size_t> gzsl_test_seen_rows;

  std::size_t n_total() const { return features.rows; }
  std::size_t feature_dim() const { return features.cols; }
  std::size_t attr_dim() const { return class_attributes.cols; }
  std::size_t class_count() const { return class_attributes.rows; }

  bool is_seen(int c) const {
    return std::find(seen_classes.begin(), seen_classes.end(), c) != seen_classes.end();
  }

  void validate(const std::string& origin = "dataset") const {
    if (labels.size() != features.rows)
      throw LoadError(origin + ": label count " + std::to_string(labels.size()) +
                      " does not match feature rows " + std::to_string(features.rows));
    std::set<int> seen(seen_classes.begin(), seen_classes.end());
    std::set<int> unseen(unseen_classes.begin(), unseen_classes.end());
    for (int c : seen_classes)
      if (unseen.count(c))
        throw LoadError(origin + ": class " + std::to_string(c) + " is both seen and unseen");
    const int c_total = static_cast<int>(class_attributes.rows);
    for (int c : seen)
      if (c < 0 || c >= c_total)
        throw LoadError(origin + ": seen class " + std::to_string(c) + " out of range (" +
                        std::to_string(c_total) + " classes)");
    for (int c : unseen)
      if (c < 0 || c >= c_total)
        throw LoadError(origin + ": unseen class " + std::to_string(c) + " out of range (" +
                        std::to_string(c_total) + " classes)");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0 || labels[i] >= c_total)
        throw LoadError(origin + ": label " + std::to_string(labels[i]) + " at row " +
                        std::to_string(i) + " out of range");
      if (!seen.count(labels[i]) && !unseen.count(labels[i]))
        throw LoadError(origin + ": label " + std::to_string(labels[i]) + " at row " +
                        std::to_string(i) + " is in neither split");
    }
    for (std::size_t r : gzsl_test_seen_rows) {
      if (r >= features.rows)
        throw LoadError(origin + ": gzsl row index " + std::to_string(r) + " out of range");
      if (!seen.count(labels[r]))
        throw LoadError(origin + ": gzsl row " + std::to_string(r) + " is not a seen-class row");
    }
    if (!all_finite(class_attributes)) throw LoadError(origin + ": non-finite attribute");
    if (!all_finite(features)) throw LoadError(origin + ": non-finite feature");
  }
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t feature_dim = 16;
  std::size_t attr_dim = 8;
  std::size_t n_seen_classes = 10;
  std::size_t n_unseen_classes = 5;
  std::size_t samples_per_class = 50;
  double noise_sigma = 0.05;

  void validate() const {
    if (feature_dim < 1 || attr_dim < 1 || n_seen_classes < 1 || n_unseen_classes < 1 ||
        samples_per_class < 1)
      throw ContractError("SynthConfig: all counts must be >= 1");
    if (noise_sigma < 0.0) throw ContractError("SynthConfig: noise_sigma must be >= 0");
  }
};

inline Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  const std::string feat_path = (fs::path(dir) / "features.csv").string();
  const std::string label_path = (fs::path(dir) / "labels.csv").string();
  const std::string attr_path = (fs::path(dir) / "attributes.csv").string();
  const std::string split_path = (fs::path(dir) / "split.json").string();
  for (const std::string& p : {feat_path, label_path, attr_path, split_path})
    if (!fs::exists(p)) throw LoadError(p + ": missing file");

  Dataset ds;
  ds.features = read_csv_matrix(feat_path);
  std::vector<long> raw_labels = read_csv_longs(label_path);
  ds.labels.assign(raw_labels.begin(), raw_labels.end());
  ds.class_attributes = read_csv_matrix(attr_path);

  std::ifstream in(split_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw LoadError(split_path + ": invalid JSON: " + e.what());
  }
  try {
    ds.seen_classes = j.at("seen").get<std::vector<int>>();
    ds.unseen_classes = j.at("unseen").get<std::vector<int>>();
    ds.gzsl_test_seen_rows = j.at("gzsl_test_seen_rows").get<std::vector<std::size_t>>();
  } catch (const std::exception& e) {
    throw LoadError(split_path + ": bad split schema: " + e.what());
  }

  ds.validate(dir);
  return ds;
}

inline void write_dataset(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  ds.validate("write_dataset");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir + ": cannot create directory");

  write_csv_matrix((fs::path(dir) / "features.csv").string(), ds.features);
  {
    std::string body;
    for (int l : ds.labels) body += std::to_string(l) + "\n";
    write_text_file((fs::path(dir) / "labels.csv").string(), body);
  }
  write_csv_matrix((fs::path(dir) / "attributes.csv").string(), ds.class_attributes);
  nlohmann::json j;
  j["seen"] = ds.seen_classes;
  j["unseen"] = ds.unseen_classes;
  j["gzsl_test_seen_rows"] = ds.gzsl_test_seen_rows;
  write_text_file((fs::path(dir) / "split.json").string(), j.dump(2) + "\n");
}

/// Synthetic dataset with a known attribute-to-feature map: attributes are
/// uniform on [0,1)^m, the map W is uniform nonnegative (so class means stay
/// inside the generator's ReLU output range), and samples are a_c * W plus
/// isotropic Gaussian noise. The last ~20% of each seen class's rows are
/// reserved for the GZSL seen-class test split.
inline std::pair<Dataset, Matrix> make_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  RngStream rng(cfg.seed);
  const std::size_t c_total = cfg.n_seen_classes + cfg.n_unseen_classes;

  Dataset ds;
  ds.class_attributes = Matrix(c_total, cfg.attr_dim);
  for (double& v : ds.class_attributes.data) v = rng.next_uniform01();

  // Map scale 4: squared-distance regularizers on these features are on the
  // same footing as the unit-Lipschitz critic signal.
  Matrix map(cfg.attr_dim, cfg.feature_dim);
  for (double& v : map.data) v = 4.0 * rng.next_uniform01();

  const std::size_t n_total = c_total * cfg.samples_per_class;
  ds.features = Matrix(n_total, cfg.feature_dim);
  ds.labels.resize(n_total);
  std::size_t row = 0;
  for (std::size_t c = 0; c < c_total; ++c) {
    std::vector<double> mean(cfg.feature_dim, 0.0);
    for (std::size_t k = 0; k < cfg.attr_dim; ++k) {
      const double a = ds.class_attributes(c, k);
      for (std::size_t jd = 0; jd < cfg.feature_dim; ++jd) mean[jd] += a * map(k, jd);
    }
    for (std::size_t s = 0; s < cfg.samples_per_class; ++s, ++row) {
      for (std::size_t jd = 0; jd < cfg.feature_dim; ++jd)
        ds.features(row, jd) = mean[jd] + cfg.noise_sigma * rng.next_gaussian();
      ds.labels[row] = static_cast<int>(c);
    }
  }

  for (std::size_t c = 0; c < cfg.n_seen_classes; ++c) ds.seen_classes.push_back(static_cast<int>(c));
  for (std::size_t c = cfg.n_seen_classes; c < c_total; ++c)
    ds.unseen_classes.push_back(static_cast<int>(c));

  const std::size_t reserve = cfg.samples_per_class / 5;
  for (std::size_t c = 0; c < cfg.n_seen_classes; ++c) {
    const std::size_t base = c * cfg.samples_per_class;
    for (std::size_t s = cfg.samples_per_class - reserve; s < cfg.samples_per_class; ++s)
      ds.gzsl_test_seen_rows.push_back(base + s);
  }

  ds.validate("make_synthetic");
  return {std::move(ds), std::move(map)};
}

/// Row-index partitions: seen-class training rows (minus GZSL reservations),
/// unseen-class test rows, and the GZSL test set (unseen rows plus the
/// reserved seen rows), each in dataset row order.
struct SplitViews {
  std::vector<std::size_t> seen_train;
  std::vector<std::size_t> unseen_test;
  std::vector<std::size_t> gzsl_test;
};

inline SplitViews split_views(const Dataset& ds) {
  std::set<std::size_t> reserved(ds.gzsl_test_seen_rows.begin(), ds.gzsl_test_seen_rows.end());
  std::set<int> seen(ds.seen_classes.begin(), ds.seen_classes.end());
  SplitViews v;
  for (std::size_t i = 0; i < ds.n_total(); ++i) {
    if (seen.count(ds.labels[i])) {
      if (reserved.count(i))
        v.gzsl_test.push_back(i);
      else
        v.seen_train.push_back(i);
    } else {
      v.unseen_test.push_back(i);
      v.gzsl_test.push_back(i);
    }
  }
  return v;
}

inline std::vector<int> labels_at(const Dataset& ds, const std::vector<std::size_t>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(ds.labels[r]);
  return out;
}

}  // namespace zsgan
