#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gridfault/core/category.hpp"
#include "gridfault/wavefeat/feature_io.hpp"
#include "gridfault/wavefeat/normalizer.hpp"

namespace gridfault::aplcore {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Hyperparams {
  int dim = 8;
  double lambda_w = 1.0;
  double lambda_v = 0.5;
  double learning_rate = 0.01;
  int max_epochs = 2000;
  int patience = 200;
  std::uint64_t seed = 0;
};

inline void validate(const Hyperparams& h) {
  require(h.dim >= 1, "embedding dimension must be >= 1");
  require(h.lambda_w >= 0 && h.lambda_v >= 0, "loss weights must be non-negative");
  require(h.learning_rate > 0, "learning rate must be positive");
  require(h.max_epochs >= 1 && h.patience >= 1, "epochs and patience must be positive");
}

/// Loss terms at one point of training.
struct LossBreakdown {
  double classification = 0.0;  // L_s
  double walker = 0.0;          // L_w
  double visit = 0.0;           // L_v
  double total = 0.0;           // L_s + lambda_w L_w + lambda_v L_v
};

struct TrainingCurve {
  std::vector<LossBreakdown> epochs;
  int best_epoch = -1;
  bool early_stopped = false;

  const LossBreakdown& best() const { return epochs.at(static_cast<std::size_t>(best_epoch)); }
};

/// Linear embedding W (d x D) plus a softmax head used for the source
/// classification term, and the labeled source bank that target samples
/// are associated against at prediction time.
struct EmbeddingModel {
  Matrix W;
  Matrix head;  // K x d
  Vector bias;  // K
  Hyperparams hyper;
  wavefeat::Normalizer normalizer;
  Matrix bank;                // n_s x d source embeddings
  std::vector<int> bank_labels;
  TrainingCurve curve;

  int dim() const { return static_cast<int>(W.rows()); }
  int input_dim() const { return static_cast<int>(W.cols()); }
};

inline Vector embed(const EmbeddingModel& model, const Eigen::Ref<const Vector>& v) {
  require(v.size() == model.W.cols(), "embed: expected " + std::to_string(model.W.cols()) +
                                          " features, got " + std::to_string(v.size()));
  return model.W * v;
}

/// Row-wise embedding of an n x D matrix.
inline Matrix embed_rows(const Matrix& W, const Matrix& X) {
  require(X.cols() == W.cols(), "embed: feature dimension mismatch");
  return X * W.transpose();
}

inline Matrix to_matrix(std::span<const wavefeat::FeatureVector> rows) {
  if (rows.empty()) return Matrix(0, wavefeat::kFeatureDim);
  const auto D = static_cast<Eigen::Index>(rows.front().values.size());
  Matrix X(static_cast<Eigen::Index>(rows.size()), D);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto& v = rows[static_cast<std::size_t>(i)].values;
    require(static_cast<Eigen::Index>(v.size()) == D, "feature rows have inconsistent dimensions");
    for (Eigen::Index j = 0; j < D; ++j) X(i, j) = v[static_cast<std::size_t>(j)];
  }
  return X;
}

inline std::vector<int> to_labels(std::span<const wavefeat::FeatureVector> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    require(r.label.has_value(), "row " + r.record_id + " has no label");
    out.push_back(index_of(*r.label));
  }
  return out;
}

}  // namespace gridfault::aplcore
