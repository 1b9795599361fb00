#pragma once

#include <array>
#include <span>

#include "gridfault/core/category.hpp"
#include "gridfault/core/error.hpp"

namespace gridfault::evalharness {

using Confusion = std::array<std::array<int, kNumCategories>, kNumCategories>;  // [truth][pred]

struct F1Scores {
  std::array<double, kNumCategories> per_category{};
  // Category neither predicted nor present: F1 set to 0 by convention.
  std::array<bool, kNumCategories> degenerate{};
  double macro = 0.0;
};

inline Confusion confusion(std::span<const Category> predictions, std::span<const Category> truths) {
  require(predictions.size() == truths.size(), "f1_scores: " + std::to_string(predictions.size()) +
                                                   " predictions for " + std::to_string(truths.size()) +
                                                   " truths");
  Confusion c{};
  for (std::size_t i = 0; i < truths.size(); ++i)
    ++c[static_cast<std::size_t>(index_of(truths[i]))][static_cast<std::size_t>(index_of(predictions[i]))];
  return c;
}

/// Per-category F1 with precision and recall from the confusion matrix;
/// F1 = 0 whenever P + R = 0. Macro is the plain mean over all four.
inline F1Scores f1_scores(std::span<const Category> predictions, std::span<const Category> truths) {
  const Confusion c = confusion(predictions, truths);
  F1Scores out;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    int tp = c[k][k], fp = 0, fn = 0;
    for (std::size_t j = 0; j < kNumCategories; ++j) {
      if (j == k) continue;
      fp += c[j][k];
      fn += c[k][j];
    }
    const double p = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double r = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
    out.per_category[k] = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    out.degenerate[k] = tp + fp + fn == 0;
    out.macro += out.per_category[k];
  }
  out.macro /= kNumCategories;
  return out;
}

}  // namespace gridfault::evalharness
