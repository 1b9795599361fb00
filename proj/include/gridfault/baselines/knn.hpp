#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gridfault/core/category.hpp"

namespace gridfault::baselines {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct KnnModel {
  Matrix points;  // n x D
  std::vector<int> labels;
  int k = 1;
};

inline KnnModel knn_fit(Matrix points, std::vector<int> labels, int k) {
  require(points.rows() >= 1, "knn_fit: empty training set");
  require(static_cast<Eigen::Index>(labels.size()) == points.rows(), "knn_fit: label count mismatch");
  require(k >= 1 && k <= points.rows(), "knn_fit: K must be in [1, n]");
  for (int y : labels) require(y >= 0 && y < kNumCategories, "knn_fit: label outside [0, K)");
  return {std::move(points), std::move(labels), k};
}

namespace detail {

struct Neighbor {
  double dist2;
  Eigen::Index index;
  bool operator<(const Neighbor& o) const {
    return dist2 < o.dist2 || (dist2 == o.dist2 && index < o.index);
  }
};

inline std::vector<Neighbor> sorted_neighbors(const Matrix& points, const Eigen::Ref<const Vector>& q,
                                              Eigen::Index exclude) {
  std::vector<Neighbor> nb;
  nb.reserve(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    if (i != exclude) nb.push_back({(points.row(i).transpose() - q).squaredNorm(), i});
  std::sort(nb.begin(), nb.end());
  return nb;
}

// Majority among the first k neighbors; ties go to the smaller mean
// distance, then to the lower category index.
inline int vote(std::span<const Neighbor> nb, std::span<const int> labels, int k) {
  std::array<int, kNumCategories> count{};
  std::array<double, kNumCategories> dist{};
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), nb.size());
  for (std::size_t i = 0; i < take; ++i) {
    const int y = labels[static_cast<std::size_t>(nb[i].index)];
    ++count[static_cast<std::size_t>(y)];
    dist[static_cast<std::size_t>(y)] += std::sqrt(nb[i].dist2);
  }
  int best = -1;
  for (int c = 0; c < kNumCategories; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    if (count[cu] == 0) continue;
    if (best < 0) { best = c; continue; }
    const auto bu = static_cast<std::size_t>(best);
    if (count[cu] > count[bu] ||
        (count[cu] == count[bu] && dist[cu] / count[cu] < dist[bu] / count[bu]))
      best = c;
  }
  return best;
}

}  // namespace detail

inline Category knn_predict(const KnnModel& model, const Eigen::Ref<const Vector>& query) {
  require(query.size() == model.points.cols(), "knn_predict: dimension mismatch");
  const auto nb = detail::sorted_neighbors(model.points, query, -1);
  return category_from_index(detail::vote(nb, model.labels, model.k));
}

inline std::vector<Category> knn_predict_rows(const KnnModel& model, const Matrix& X) {
  std::vector<Category> out;
  for (Eigen::Index i = 0; i < X.rows(); ++i) out.push_back(knn_predict(model, X.row(i).transpose()));
  return out;
}

inline const std::vector<int>& default_k_candidates() {
  static const std::vector<int> ks = {1, 3, 5, 7, 10, 15};
  return ks;
}

/// K with the highest accuracy on a labeled selection set; ties go to the
/// smaller K. Candidates larger than the training set are skipped.
inline int knn_select_k(const Matrix& train_x, std::span<const int> train_y, const Matrix& select_x,
                        std::span<const int> select_y, std::span<const int> candidates) {
  require(!candidates.empty(), "knn_select_k: no candidates");
  require(static_cast<Eigen::Index>(select_y.size()) == select_x.rows(), "knn_select_k: label count mismatch");
  std::vector<std::vector<detail::Neighbor>> nbs;
  for (Eigen::Index q = 0; q < select_x.rows(); ++q)
    nbs.push_back(detail::sorted_neighbors(train_x, select_x.row(q).transpose(), -1));
  int best_k = -1, best_hits = -1;
  for (int k : candidates) {
    if (k < 1 || k > train_x.rows()) continue;
    int hits = 0;
    for (std::size_t q = 0; q < nbs.size(); ++q) hits += detail::vote(nbs[q], train_y, k) == select_y[q];
    if (hits > best_hits || (hits == best_hits && k < best_k)) {
      best_hits = hits;
      best_k = k;
    }
  }
  require(best_k > 0, "knn_select_k: no candidate fits the training set size");
  return best_k;
}

/// Leave-one-out selection on the training set itself: each point is
/// classified by its neighbors with itself excluded.
inline int knn_select_k_loo(const Matrix& train_x, std::span<const int> train_y,
                            std::span<const int> candidates) {
  require(!candidates.empty(), "knn_select_k: no candidates");
  require(train_x.rows() >= 2, "knn_select_k: leave-one-out needs at least two points");
  std::vector<std::vector<detail::Neighbor>> nbs;
  for (Eigen::Index q = 0; q < train_x.rows(); ++q)
    nbs.push_back(detail::sorted_neighbors(train_x, train_x.row(q).transpose(), q));
  int best_k = -1, best_hits = -1;
  for (int k : candidates) {
    if (k < 1 || k > train_x.rows() - 1) continue;
    int hits = 0;
    for (std::size_t q = 0; q < nbs.size(); ++q) hits += detail::vote(nbs[q], train_y, k) == train_y[q];
    if (hits > best_hits || (hits == best_hits && k < best_k)) {
      best_hits = hits;
      best_k = k;
    }
  }
  require(best_k > 0, "knn_select_k: no candidate fits the training set size");
  return best_k;
}

}  // namespace gridfault::baselines
