#pragma once

#include <cmath>

#include "gridfault/aplcore/model.hpp"

namespace gridfault::aplcore {

/// Transition probabilities between a source batch (rows of A) and a
/// target batch (rows of B) under inner-product similarity.
struct AssociationMatrices {
  Matrix M;     // n_s x n_t, M_ik = <a_i, b_k>
  Matrix Pab;   // n_s x n_t, softmax over targets
  Matrix Pba;   // n_t x n_s, softmax over sources
  Matrix Paba;  // n_s x n_s, Pab * Pba
};

/// Row softmax with max subtraction.
inline Matrix row_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

/// Row log-softmax with max subtraction.
inline Matrix row_log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    const double lse = m + std::log((logits.row(r).array() - m).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

inline AssociationMatrices association(const Matrix& source, const Matrix& target) {
  require(source.rows() >= 1 && target.rows() >= 1, "association: empty batch");
  require(source.cols() == target.cols(), "association: embedding dimensions differ");
  require(source.allFinite() && target.allFinite(), "association: non-finite embeddings");
  AssociationMatrices am;
  am.M = source * target.transpose();
  am.Pab = row_softmax(am.M);
  am.Pba = row_softmax(am.M.transpose());
  am.Paba = am.Pab * am.Pba;
  return am;
}

}  // namespace gridfault::aplcore
