#pragma once

#include <array>

#include "gridfault/aplcore/association.hpp"

namespace gridfault::aplcore {

struct Prediction {
  Category category = Category::SIF;
  std::array<double, kNumCategories> scores{};  // association mass per category
};

/// Assigns a target embedding to the category holding the most of its
/// transition mass back onto the labeled source bank.
inline Prediction predict_embedding(const Matrix& bank, std::span<const int> bank_labels,
                                    const Eigen::Ref<const Vector>& target) {
  require(bank.rows() >= 1, "predict: empty source bank");
  require(static_cast<Eigen::Index>(bank_labels.size()) == bank.rows(), "predict: bank label count mismatch");
  require(target.size() == bank.cols(), "predict: embedding dimension mismatch");
  const Vector logits = bank * target;
  const double m = logits.maxCoeff();
  const Vector w = (logits.array() - m).exp().matrix();
  const double z = w.sum();
  Prediction p;
  for (Eigen::Index i = 0; i < bank.rows(); ++i)
    p.scores[static_cast<std::size_t>(bank_labels[static_cast<std::size_t>(i)])] += w(i) / z;
  int best = 0;
  for (int c = 1; c < kNumCategories; ++c)
    if (p.scores[static_cast<std::size_t>(c)] > p.scores[static_cast<std::size_t>(best)]) best = c;
  p.category = category_from_index(best);
  return p;
}

/// Predicts a normalized feature vector with a trained model.
inline Prediction predict(const EmbeddingModel& model, const Eigen::Ref<const Vector>& features) {
  return predict_embedding(model.bank, model.bank_labels, embed(model, features));
}

inline std::vector<Prediction> predict_rows(const EmbeddingModel& model, const Matrix& X) {
  std::vector<Prediction> out;
  out.reserve(static_cast<std::size_t>(X.rows()));
  const Matrix E = embed_rows(model.W, X);
  for (Eigen::Index i = 0; i < E.rows(); ++i)
    out.push_back(predict_embedding(model.bank, model.bank_labels, E.row(i).transpose()));
  return out;
}

}  // namespace gridfault::aplcore
