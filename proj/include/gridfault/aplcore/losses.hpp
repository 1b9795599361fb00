#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "gridfault/aplcore/association.hpp"

namespace gridfault::aplcore {

inline constexpr double kLogEpsilon = 1e-12;

/// T_ij = 1/N_c(y_i) when y_i == y_j, else 0.
inline Matrix target_distribution(std::span<const int> labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  std::vector<int> counts(kNumCategories, 0);
  for (int y : labels) {
    require(y >= 0 && y < kNumCategories, "label outside [0, K)");
    ++counts[static_cast<std::size_t>(y)];
  }
  Matrix T = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)])
        T(i, j) = 1.0 / counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  return T;
}

/// Cross-entropy of the round-trip matrix against T, averaged over rows.
inline double walker_loss(const Matrix& Paba, std::span<const int> labels) {
  require(Paba.rows() == static_cast<Eigen::Index>(labels.size()) && Paba.cols() == Paba.rows(),
          "walker_loss: Paba must be n_s x n_s");
  const Matrix T = target_distribution(labels);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < T.rows(); ++i)
    for (Eigen::Index j = 0; j < T.cols(); ++j)
      if (T(i, j) > 0.0) sum += T(i, j) * std::log(Paba(i, j) + kLogEpsilon);
  return -sum / static_cast<double>(T.rows());
}

/// Mean source-to-target visit probability against the uniform distribution.
inline double visit_loss(const Matrix& Pab) {
  require(Pab.rows() >= 1 && Pab.cols() >= 1, "visit_loss: empty matrix");
  const Vector visit = Pab.colwise().sum().transpose() / static_cast<double>(Pab.rows());
  const double v = 1.0 / static_cast<double>(Pab.cols());
  double sum = 0.0;
  for (Eigen::Index k = 0; k < visit.size(); ++k) sum += v * std::log(visit(k) + kLogEpsilon);
  return -sum;
}

/// Mean softmax cross-entropy of head logits against labels.
inline double classification_loss(const Matrix& embeddings, const Matrix& head, const Vector& bias,
                                  std::span<const int> labels) {
  require(embeddings.rows() == static_cast<Eigen::Index>(labels.size()),
          "classification_loss: embeddings and labels differ in length");
  require(head.rows() == bias.size() && head.cols() == embeddings.cols(),
          "classification_loss: head shape mismatch");
  if (labels.empty()) return 0.0;
  Matrix logits = embeddings * head.transpose();
  logits.rowwise() += bias.transpose();
  const Matrix logp = row_log_softmax(logits);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logp.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    require(y >= 0 && y < head.rows(), "classification_loss: label outside [0, K)");
    sum -= logp(i, y);
  }
  return sum / static_cast<double>(labels.size());
}

inline LossBreakdown total_loss(const Matrix& W, const Matrix& head, const Vector& bias,
                                const Hyperparams& hyper, const Matrix& source_x,
                                std::span<const int> source_labels, const Matrix& target_x) {
  const Matrix A = embed_rows(W, source_x);
  const Matrix B = embed_rows(W, target_x);
  const AssociationMatrices am = association(A, B);
  LossBreakdown out;
  out.classification = classification_loss(A, head, bias, source_labels);
  out.walker = walker_loss(am.Paba, source_labels);
  out.visit = visit_loss(am.Pab);
  out.total = out.classification + hyper.lambda_w * out.walker + hyper.lambda_v * out.visit;
  return out;
}

inline LossBreakdown total_loss(const EmbeddingModel& model, const Matrix& source_x,
                                std::span<const int> source_labels, const Matrix& target_x) {
  return total_loss(model.W, model.head, model.bias, model.hyper, source_x, source_labels, target_x);
}

}  // namespace gridfault::aplcore
