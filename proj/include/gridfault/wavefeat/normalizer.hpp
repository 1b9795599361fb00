#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "gridfault/wavefeat/features.hpp"

namespace gridfault::wavefeat {

/// Per-dimension min-max scaling onto [0, 1]. Constant dimensions map to
/// 0.5; out-of-range inputs are clamped.
struct Normalizer {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t dim() const { return min.size(); }

  double apply(std::size_t i, double v) const {
    const double span = max[i] - min[i];
    if (!(span > 0.0)) return 0.5;
    return std::clamp((v - min[i]) / span, 0.0, 1.0);
  }
};

inline Normalizer fit_normalizer(std::span<const FeatureVector> vectors) {
  require(!vectors.empty(), "fit_normalizer: empty fitting set");
  const std::size_t d = vectors.front().values.size();
  Normalizer n{vectors.front().values, vectors.front().values};
  for (const auto& v : vectors) {
    require(v.values.size() == d, "fit_normalizer: inconsistent dimensions");
    for (std::size_t i = 0; i < d; ++i) {
      n.min[i] = std::min(n.min[i], v.values[i]);
      n.max[i] = std::max(n.max[i], v.values[i]);
    }
  }
  return n;
}

inline FeatureVector apply_normalizer(const Normalizer& n, const FeatureVector& v) {
  require(v.values.size() == n.dim(), "apply_normalizer: dimension mismatch");
  FeatureVector out = v;
  for (std::size_t i = 0; i < n.dim(); ++i) out.values[i] = n.apply(i, v.values[i]);
  return out;
}

inline std::vector<FeatureVector> apply_normalizer(const Normalizer& n,
                                                   std::span<const FeatureVector> vs) {
  std::vector<FeatureVector> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(apply_normalizer(n, v));
  return out;
}

}  // namespace gridfault::wavefeat
