#pragma once

// Analytic gradients of L_s + lambda_w L_w + lambda_v L_v with respect to
// W, the head and its bias.
//
// T is block-diagonal by category, so the walker term only needs the
// same-category blocks of Pab * Pba; the full n_s x n_s product is never
// formed here.

#include <array>
#include <vector>

#include "gridfault/aplcore/losses.hpp"

namespace gridfault::aplcore {

struct Gradients {
  Matrix W;
  Matrix head;
  Vector bias;
  LossBreakdown loss;

  double squared_norm() const {
    return W.squaredNorm() + head.squaredNorm() + bias.squaredNorm();
  }
};

namespace detail {

// Backward pass of a row softmax: given P = softmax(X) row-wise and dL/dP,
// returns dL/dX.
inline Matrix softmax_backward(const Matrix& P, const Matrix& grad_p) {
  Matrix out = P.cwiseProduct(grad_p);
  const Vector dot = out.rowwise().sum();
  out -= P.cwiseProduct(dot.replicate(1, P.cols()));
  return out;
}

}  // namespace detail

inline Gradients gradients(const Matrix& W, const Matrix& head, const Vector& bias,
                           const Hyperparams& hyper, const Matrix& source_x,
                           std::span<const int> source_labels, const Matrix& target_x) {
  const Eigen::Index n_s = source_x.rows();
  const Eigen::Index n_t = target_x.rows();
  require(n_s >= 1 && n_t >= 1, "gradients: empty batch");
  require(static_cast<Eigen::Index>(source_labels.size()) == n_s, "gradients: label count mismatch");

  const Matrix A = embed_rows(W, source_x);
  const Matrix B = embed_rows(W, target_x);
  const Matrix M = A * B.transpose();
  const Matrix Pab = row_softmax(M);
  const Matrix Pba = row_softmax(M.transpose());

  Gradients g;
  Matrix grad_pab = Matrix::Zero(n_s, n_t);
  Matrix grad_pba = Matrix::Zero(n_t, n_s);

  // Walker term, one category block at a time.
  std::array<std::vector<Eigen::Index>, kNumCategories> members;
  for (Eigen::Index i = 0; i < n_s; ++i) {
    const int y = source_labels[static_cast<std::size_t>(i)];
    require(y >= 0 && y < kNumCategories, "gradients: label outside [0, K)");
    members[static_cast<std::size_t>(y)].push_back(i);
  }
  const double inv_ns = 1.0 / static_cast<double>(n_s);
  for (const auto& idx : members) {
    if (idx.empty()) continue;
    const double t = 1.0 / static_cast<double>(idx.size());
    const Matrix pab_c = Pab(idx, Eigen::all);
    const Matrix pba_c = Pba(Eigen::all, idx);
    const Matrix block = pab_c * pba_c;
    const Matrix shifted = block.array() + kLogEpsilon;
    g.loss.walker -= inv_ns * t * shifted.array().log().sum();
    const Matrix dblock = (-hyper.lambda_w * inv_ns * t) * shifted.cwiseInverse();
    grad_pab(idx, Eigen::all) += dblock * pba_c.transpose();
    grad_pba(Eigen::all, idx) += pab_c.transpose() * dblock;
  }

  // Visit term.
  const Vector visit = Pab.colwise().sum().transpose() * inv_ns;
  const double v = 1.0 / static_cast<double>(n_t);
  Eigen::RowVectorXd dvisit(n_t);
  for (Eigen::Index k = 0; k < n_t; ++k) {
    g.loss.visit -= v * std::log(visit(k) + kLogEpsilon);
    dvisit(k) = -hyper.lambda_v * v / (visit(k) + kLogEpsilon) * inv_ns;
  }
  grad_pab.rowwise() += dvisit;

  Matrix dM = detail::softmax_backward(Pab, grad_pab);
  dM += detail::softmax_backward(Pba, grad_pba).transpose();

  Matrix dA = dM * B;
  const Matrix dB = dM.transpose() * A;

  // Source classification term.
  Matrix logits = A * head.transpose();
  logits.rowwise() += bias.transpose();
  const Matrix logp = row_log_softmax(logits);
  Matrix dZ = logp.array().exp().matrix();
  for (Eigen::Index i = 0; i < n_s; ++i) {
    const int y = source_labels[static_cast<std::size_t>(i)];
    g.loss.classification -= logp(i, y);
    dZ(i, y) -= 1.0;
  }
  g.loss.classification *= inv_ns;
  dZ *= inv_ns;
  g.head = dZ.transpose() * A;
  g.bias = dZ.colwise().sum().transpose();
  dA += dZ * head;

  g.W = dA.transpose() * source_x + dB.transpose() * target_x;
  g.loss.total = g.loss.classification + hyper.lambda_w * g.loss.walker + hyper.lambda_v * g.loss.visit;
  return g;
}

inline Gradients gradients(const EmbeddingModel& model, const Matrix& source_x,
                           std::span<const int> source_labels, const Matrix& target_x) {
  return gradients(model.W, model.head, model.bias, model.hyper, source_x, source_labels, target_x);
}

}  // namespace gridfault::aplcore
