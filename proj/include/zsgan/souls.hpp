#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "zsgan/errors.hpp"
#include "zsgan/matrix.hpp"
#include "zsgan/rng.hpp"

namespace zsgan {

struct KmeansResult {
  std::vector<std::size_t> assignments;  // per point: centroid index
  Matrix centroids;                      // k x d
  double sse = 0.0;
};

namespace detail {

// Canonical point order: lexicographic over coordinates. All random index
// draws walk this order, which makes the centroid *set* invariant under any
// permutation of the input rows.
inline std::vector<std::size_t> canonical_order(const Matrix& pts) {
  std::vector<std::size_t> order(pts.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(pts.row(a), pts.row(a) + pts.cols, pts.row(b),
                                        pts.row(b) + pts.cols);
  });
  return order;
}

inline std::vector<std::size_t> assign_nearest(const Matrix& pts, const Matrix& centroids) {
  std::vector<std::size_t> assign(pts.rows);
  for (std::size_t i = 0; i < pts.rows; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < centroids.rows; ++j) {
      const double d = squared_distance(pts.row(i), centroids.row(j), pts.cols);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    assign[i] = best_j;
  }
  return assign;
}

inline double sse_of(const Matrix& pts, const Matrix& centroids,
                     const std::vector<std::size_t>& assign) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.rows; ++i)
    s += squared_distance(pts.row(i), centroids.row(assign[i]), pts.cols);
  return s;
}

inline Matrix kmeanspp_seed(const Matrix& pts, const std::vector<std::size_t>& order,
                            std::size_t k, RngStream& rng) {
  const std::size_t p = pts.rows;
  Matrix centroids(k, pts.cols);
  std::size_t first = static_cast<std::size_t>(rng.next_uniform01() * static_cast<double>(p));
  if (first >= p) first = p - 1;
  for (std::size_t j = 0; j < pts.cols; ++j) centroids(0, j) = pts(order[first], j);

  std::vector<double> d2(p);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < c; ++j)
        best = std::min(best, squared_distance(pts.row(i), centroids.row(j), pts.cols));
      d2[i] = best;
      total += best;
    }
    const double u = rng.next_uniform01();
    std::size_t pick = order[0];
    if (total > 0.0) {
      const double threshold = u * total;
      double cum = 0.0;
      for (std::size_t oi = 0; oi < p; ++oi) {
        cum += d2[order[oi]];
        if (cum >= threshold && d2[order[oi]] > 0.0) {
          pick = order[oi];
          break;
        }
      }
    }
    for (std::size_t j = 0; j < pts.cols; ++j) centroids(c, j) = pts(pick, j);
  }
  return centroids;
}

inline void lloyd_iterate(const Matrix& pts, const std::vector<std::size_t>& order,
                          std::size_t k, Matrix& centroids, std::vector<std::size_t>& assign,
                          std::size_t max_iters) {
  const std::size_t p = pts.rows;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    Matrix next(k, pts.cols);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t oi = 0; oi < p; ++oi) {
      const std::size_t i = order[oi];
      ++count[assign[i]];
      const double* r = pts.row(i);
      double* c = next.row(assign[i]);
      for (std::size_t j = 0; j < pts.cols; ++j) c[j] += r[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) {
        double* cr = next.row(c);
        for (std::size_t j = 0; j < pts.cols; ++j) cr[j] /= static_cast<double>(count[c]);
      } else {
        // Emptied cluster: reseed to the point farthest from its former centroid.
        double best = -1.0;
        std::size_t pick = order[0];
        for (std::size_t oi = 0; oi < p; ++oi) {
          const double d = squared_distance(pts.row(order[oi]), centroids.row(c), pts.cols);
          if (d > best) {
            best = d;
            pick = order[oi];
          }
        }
        for (std::size_t j = 0; j < pts.cols; ++j) next(c, j) = pts(pick, j);
      }
    }
    centroids = std::move(next);
    std::vector<std::size_t> fresh = assign_nearest(pts, centroids);
    const bool stable = fresh == assign;
    assign = std::move(fresh);
    if (stable) break;
  }
}

// Hartigan-style refinement: apply the first single-point move that strictly
// lowers the SSE, then let Lloyd re-converge. Escapes the shallow local
// minima Lloyd alone is prone to on small instances.
inline bool improve_by_single_move(const Matrix& pts, const std::vector<std::size_t>& order,
                                   std::size_t k, std::vector<std::size_t>& assign) {
  const std::size_t p = pts.rows;
  const std::size_t d = pts.cols;
  Matrix sums(k, d);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t oi = 0; oi < p; ++oi) {
    const std::size_t i = order[oi];
    ++count[assign[i]];
    double* s = sums.row(assign[i]);
    const double* r = pts.row(i);
    for (std::size_t j = 0; j < d; ++j) s[j] += r[j];
  }
  std::vector<double> mean(d);
  for (std::size_t oi = 0; oi < p; ++oi) {
    const std::size_t i = order[oi];
    const std::size_t a = assign[i];
    if (count[a] <= 1) continue;  // keep clusters nonempty
    const double na = static_cast<double>(count[a]);
    for (std::size_t j = 0; j < d; ++j) mean[j] = sums(a, j) / na;
    const double remove_gain =
        na / (na - 1.0) * squared_distance(pts.row(i), mean.data(), d);
    for (std::size_t c = 0; c < k; ++c) {
      if (c == a) continue;
      const double nc = static_cast<double>(count[c]);
      for (std::size_t j = 0; j < d; ++j) mean[j] = sums(c, j) / nc;
      const double add_cost = nc / (nc + 1.0) * squared_distance(pts.row(i), mean.data(), d);
      if (add_cost < remove_gain - 1e-12) {
        assign[i] = c;
        return true;
      }
    }
  }
  return false;
}

inline KmeansResult lloyd_once(const Matrix& pts, const std::vector<std::size_t>& order,
                               std::size_t k, RngStream& rng, std::size_t max_iters) {
  Matrix centroids = kmeanspp_seed(pts, order, k, rng);
  std::vector<std::size_t> assign = assign_nearest(pts, centroids);
  lloyd_iterate(pts, order, k, centroids, assign, max_iters);
  for (std::size_t round = 0; round < max_iters; ++round) {
    if (!improve_by_single_move(pts, order, k, assign)) break;
    lloyd_iterate(pts, order, k, centroids, assign, max_iters);
  }
  // Final centroids are the assignment-group means.
  Matrix final_c(k, pts.cols);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t oi = 0; oi < pts.rows; ++oi) {
    const std::size_t i = order[oi];
    ++count[assign[i]];
    double* c = final_c.row(assign[i]);
    const double* r = pts.row(i);
    for (std::size_t j = 0; j < pts.cols; ++j) c[j] += r[j];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] > 0)
      for (std::size_t j = 0; j < pts.cols; ++j) final_c(c, j) /= static_cast<double>(count[c]);
    else
      for (std::size_t j = 0; j < pts.cols; ++j) final_c(c, j) = centroids(c, j);
  }
  KmeansResult res;
  res.sse = sse_of(pts, final_c, assign);
  res.assignments = std::move(assign);
  res.centroids = std::move(final_c);
  return res;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Runs a handful of seeded restarts
/// and keeps the lowest-SSE result. With k > p every point becomes a centroid
/// and the surplus centroids duplicate points, owning empty assignment lists.
inline KmeansResult kmeans(const Matrix& points, std::size_t k, RngStream& rng,
                           std::size_t max_iters = 100) {
  if (points.rows < 1 || k < 1) throw ContractError("kmeans: need p >= 1 and k >= 1");
  const std::size_t p = points.rows;
  const std::vector<std::size_t> order = detail::canonical_order(points);

  if (k >= p) {
    KmeansResult res;
    res.centroids = Matrix(k, points.cols);
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t j = 0; j < points.cols; ++j)
        res.centroids(c, j) = points(order[c % p], j);
    res.assignments = detail::assign_nearest(points, res.centroids);
    res.sse = detail::sse_of(points, res.centroids, res.assignments);
    return res;
  }

  constexpr std::size_t kRestarts = 8;
  KmeansResult best;
  best.sse = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < kRestarts; ++r) {
    KmeansResult cur = detail::lloyd_once(points, order, k, rng, max_iters);
    if (cur.sse < best.sse) best = std::move(cur);
  }
  return best;
}

/// Per class id, exactly k meta-representation vectors of dimension dim.
struct SoulSet {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::map<int, Matrix> by_class;  // class id -> k x dim

  const Matrix& of(int class_id) const {
    auto it = by_class.find(class_id);
    if (it == by_class.end())
      throw ContractError("SoulSet: no souls for class " + std::to_string(class_id));
    return it->second;
  }
};

/// Cluster each seen class's real features into k groups; the souls are the
/// group centroids.
inline SoulSet real_souls(const Matrix& features, const std::vector<int>& labels,
                          const std::vector<int>& class_ids, std::size_t k, RngStream& rng,
                          std::size_t max_iters = 100) {
  if (k < 1) throw ContractError("real_souls: k must be >= 1");
  if (features.rows != labels.size()) throw DimensionError("real_souls: label count mismatch");
  SoulSet set;
  set.k = k;
  set.dim = features.cols;
  for (int c : class_ids) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) rows.push_back(i);
    if (rows.empty())
      throw ContractError("real_souls: class " + std::to_string(c) + " has no samples");
    Matrix pts = take_rows(features, rows);
    set.by_class[c] = kmeans(pts, k, rng, max_iters).centroids;
  }
  return set;
}

/// Fake souls grouped by nearest real soul of the same class; group identity
/// is frozen so the gradient of anything built on them can be chained back to
/// the generated rows.
struct FakeSouls {
  SoulSet souls;
  std::vector<std::size_t> group_of_row;           // per generated row
  std::map<int, std::vector<std::size_t>> counts;  // class -> per-group sizes
};

inline FakeSouls fake_souls(const Matrix& generated, const std::vector<int>& gen_labels,
                            const SoulSet& reals) {
  if (generated.rows != gen_labels.size())
    throw DimensionError("fake_souls: label count mismatch");
  if (generated.cols != reals.dim) throw DimensionError("fake_souls: feature width mismatch");

  FakeSouls out;
  out.souls.k = reals.k;
  out.souls.dim = reals.dim;
  out.group_of_row.resize(generated.rows);

  std::map<int, Matrix> sums;
  for (const auto& [c, souls] : reals.by_class) {
    sums[c] = Matrix(reals.k, reals.dim);
    out.counts[c].assign(reals.k, 0);
  }
  for (std::size_t i = 0; i < generated.rows; ++i) {
    const int c = gen_labels[i];
    auto it = reals.by_class.find(c);
    if (it == reals.by_class.end())
      throw ContractError("fake_souls: no real souls for class " + std::to_string(c));
    const Matrix& souls = it->second;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < reals.k; ++j) {
      const double d = squared_distance(generated.row(i), souls.row(j), reals.dim);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    out.group_of_row[i] = best_j;
    ++out.counts[c][best_j];
    double* acc = sums[c].row(best_j);
    const double* g = generated.row(i);
    for (std::size_t jd = 0; jd < reals.dim; ++jd) acc[jd] += g[jd];
  }

  for (const auto& [c, real] : reals.by_class) {
    Matrix fake(reals.k, reals.dim);
    for (std::size_t j = 0; j < reals.k; ++j) {
      const std::size_t n = out.counts[c][j];
      for (std::size_t jd = 0; jd < reals.dim; ++jd)
        // A group without assignees copies the real soul, zeroing its term.
        fake(j, jd) = n > 0 ? sums[c](j, jd) / static_cast<double>(n) : real(j, jd);
    }
    out.souls.by_class[c] = std::move(fake);
  }
  return out;
}

struct RegLoss {
  double loss = 0.0;
  Matrix grads;  // w.r.t. the generated rows
};

/// Each generated sample should sit close to at least one soul of its class:
/// mean over rows of the squared distance to the nearest class soul.
inline RegLoss reg_r1(const Matrix& generated, const std::vector<int>& gen_labels,
                      const SoulSet& reals) {
  if (generated.rows == 0) throw ContractError("reg_r1: empty batch");
  if (generated.rows != gen_labels.size()) throw DimensionError("reg_r1: label count mismatch");
  RegLoss out;
  out.grads = Matrix(generated.rows, generated.cols);
  const double inv_n = 1.0 / static_cast<double>(generated.rows);
  for (std::size_t i = 0; i < generated.rows; ++i) {
    const Matrix& souls = reals.of(gen_labels[i]);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < souls.rows; ++j) {
      const double d = squared_distance(generated.row(i), souls.row(j), generated.cols);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    out.loss += best * inv_n;
    const double* g = generated.row(i);
    const double* s = souls.row(best_j);
    double* gr = out.grads.row(i);
    for (std::size_t jd = 0; jd < generated.cols; ++jd)
      gr[jd] = 2.0 * inv_n * (g[jd] - s[jd]);
  }
  return out;
}

struct SoulRegLoss {
  double loss = 0.0;
  std::map<int, Matrix> grads;  // per class: k x dim, w.r.t. the fake souls
};

/// Fake souls should stay close to real souls, one term per class: the
/// minimum over aligned-index pairs by default, or over all soul pairs with
/// cross_pairs.
inline SoulRegLoss reg_r2(const SoulSet& fakes, const SoulSet& reals, bool cross_pairs = false) {
  if (fakes.k != reals.k || fakes.dim != reals.dim)
    throw ContractError("reg_r2: soul sets disagree on k or dimension");
  if (fakes.by_class.size() != reals.by_class.size())
    throw ContractError("reg_r2: soul sets cover different classes");
  for (const auto& [c, unused] : fakes.by_class)
    if (!reals.by_class.count(c))
      throw ContractError("reg_r2: class " + std::to_string(c) + " missing from real souls");

  SoulRegLoss out;
  const double inv_c = 1.0 / static_cast<double>(fakes.by_class.size());
  for (const auto& [c, fake] : fakes.by_class) {
    const Matrix& real = reals.by_class.at(c);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0, best_jr = 0;
    for (std::size_t j = 0; j < fakes.k; ++j) {
      if (cross_pairs) {
        for (std::size_t jr = 0; jr < reals.k; ++jr) {
          const double d = squared_distance(fake.row(j), real.row(jr), fakes.dim);
          if (d < best) {
            best = d;
            best_j = j;
            best_jr = jr;
          }
        }
      } else {
        const double d = squared_distance(fake.row(j), real.row(j), fakes.dim);
        if (d < best) {
          best = d;
          best_j = j;
          best_jr = j;
        }
      }
    }
    out.loss += best * inv_c;
    Matrix g(fakes.k, fakes.dim);
    const double* f = fake.row(best_j);
    const double* r = real.row(best_jr);
    double* gr = g.row(best_j);
    for (std::size_t jd = 0; jd < fakes.dim; ++jd) gr[jd] = 2.0 * inv_c * (f[jd] - r[jd]);
    out.grads[c] = std::move(g);
  }
  return out;
}

/// Chain soul-level gradients back to the generated rows through the frozen
/// assignment groups (each assigned row contributes 1/|group| to its soul).
inline Matrix chain_soul_grads_to_rows(const SoulRegLoss& reg, const FakeSouls& fakes,
                                       const Matrix& generated,
                                       const std::vector<int>& gen_labels) {
  Matrix grads(generated.rows, generated.cols);
  for (std::size_t i = 0; i < generated.rows; ++i) {
    const int c = gen_labels[i];
    const std::size_t j = fakes.group_of_row[i];
    auto git = reg.grads.find(c);
    if (git == reg.grads.end()) continue;
    const std::size_t n = fakes.counts.at(c)[j];
    if (n == 0) continue;
    const double* sg = git->second.row(j);
    double* gr = grads.row(i);
    for (std::size_t jd = 0; jd < generated.cols; ++jd)
      gr[jd] = sg[jd] / static_cast<double>(n);
  }
  return grads;
}

}  // namespace zsgan
