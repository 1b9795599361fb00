#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "gridfault/aplcore/gradients.hpp"

namespace gridfault::aplcore {

namespace detail {

// Adam moments for one parameter block.
struct AdamSlot {
  Matrix m, v;

  void step(Matrix& param, const Matrix& grad, double lr, int t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    if (m.size() == 0) {
      m = Matrix::Zero(grad.rows(), grad.cols());
      v = Matrix::Zero(grad.rows(), grad.cols());
    }
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

}  // namespace detail

/// Scale-balanced random W, zero head.
inline EmbeddingModel init_model(int input_dim, const Hyperparams& hyper) {
  validate(hyper);
  EmbeddingModel model;
  model.hyper = hyper;
  std::mt19937_64 rng(hyper.seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / (input_dim + hyper.dim)));
  model.W.resize(hyper.dim, input_dim);
  for (Eigen::Index r = 0; r < model.W.rows(); ++r)
    for (Eigen::Index c = 0; c < model.W.cols(); ++c) model.W(r, c) = gauss(rng);
  model.head = Matrix::Zero(kNumCategories, hyper.dim);
  model.bias = Vector::Zero(kNumCategories);
  return model;
}

/// Optional external checkpoint scoring (higher is better), evaluated every
/// `every` epochs and at the last epoch run. When set, it replaces the
/// objective as the rule for which parameters are returned; early stopping
/// still follows the objective.
struct CheckpointSelector {
  int every = 25;
  std::function<double(int epoch, const EmbeddingModel&)> score;
};

/// Full-batch Adam on the combined objective. Keeps the parameters of the
/// lowest-objective epoch; stops after `patience` epochs without improvement.
///
/// `source_x` and `target_x` are normalized feature matrices. The returned
/// model carries its source bank (embedded source rows and labels).
inline EmbeddingModel train(const Matrix& source_x, std::span<const int> source_labels,
                            const Matrix& target_x, const Hyperparams& hyper,
                            const std::function<void(int, const LossBreakdown&)>& on_epoch = {},
                            const CheckpointSelector& selector = {}) {
  validate(hyper);
  require(source_x.rows() >= 1, "train: empty source set");
  require(target_x.rows() >= 1, "train: empty target set");
  require(source_x.cols() == target_x.cols(), "train: source and target dimensions differ");
  require(hyper.dim < source_x.cols(), "train: embedding dimension must be below the feature dimension");
  std::array<int, kNumCategories> seen{};
  for (int y : source_labels) {
    require(y >= 0 && y < kNumCategories, "train: label outside [0, K)");
    ++seen[static_cast<std::size_t>(y)];
  }
  for (int c = 0; c < kNumCategories; ++c)
    require(seen[static_cast<std::size_t>(c)] > 0,
            "train: category " + std::string(to_string(category_from_index(c))) + " missing from source");

  EmbeddingModel model = init_model(static_cast<int>(source_x.cols()), hyper);
  Matrix best_W = model.W, best_head = model.head;
  Vector best_bias = model.bias;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;

  const bool external = static_cast<bool>(selector.score);
  require(!external || selector.every >= 1, "train: checkpoint interval must be positive");
  double best_score = -std::numeric_limits<double>::infinity();
  int scored_epoch = -1;
  auto score_checkpoint = [&](int epoch) {
    model.bank = embed_rows(model.W, source_x);
    model.bank_labels.assign(source_labels.begin(), source_labels.end());
    const double s = selector.score(epoch, model);
    if (s > best_score) {
      best_score = s;
      best_W = model.W;
      best_head = model.head;
      best_bias = model.bias;
      scored_epoch = epoch;
    }
  };

  detail::AdamSlot adam_w, adam_head, adam_bias;
  for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
    const Gradients g = gradients(model, source_x, source_labels, target_x);
    if (!std::isfinite(g.loss.total) || !g.W.allFinite())
      fail(ErrorKind::Divergence, "train: objective became non-finite at epoch " + std::to_string(epoch) +
                                      " (L_s=" + std::to_string(g.loss.classification) +
                                      ", L_w=" + std::to_string(g.loss.walker) +
                                      ", L_v=" + std::to_string(g.loss.visit) + ")");
    model.curve.epochs.push_back(g.loss);
    if (on_epoch) on_epoch(epoch, g.loss);
    if (external && (epoch % selector.every == 0 || epoch == hyper.max_epochs - 1)) score_checkpoint(epoch);
    if (g.loss.total < best - 1e-9) {
      best = g.loss.total;
      if (!external) {
        best_W = model.W;
        best_head = model.head;
        best_bias = model.bias;
        model.curve.best_epoch = epoch;
      }
      since_best = 0;
    } else if (++since_best >= hyper.patience) {
      model.curve.early_stopped = true;
      if (external && epoch != scored_epoch && epoch % selector.every != 0) score_checkpoint(epoch);
      break;
    }
    adam_w.step(model.W, g.W, hyper.learning_rate, epoch + 1);
    adam_head.step(model.head, g.head, hyper.learning_rate, epoch + 1);
    Matrix b = model.bias;
    adam_bias.step(b, g.bias, hyper.learning_rate, epoch + 1);
    model.bias = b;
  }
  if (external) model.curve.best_epoch = scored_epoch;
  model.W = best_W;
  model.head = best_head;
  model.bias = best_bias;
  model.bank = embed_rows(model.W, source_x);
  model.bank_labels.assign(source_labels.begin(), source_labels.end());
  return model;
}

}  // namespace gridfault::aplcore
