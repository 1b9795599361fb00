#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gridfault/core/error.hpp"

namespace gridfault::evalharness {

inline constexpr int kValidationSize = 160;
inline constexpr int kNominalTargetSize = 316;

/// Target-set partition for one repetition. Training is always the whole
/// source set, so only target indices are stored.
struct SplitSpec {
  std::vector<int> validation;
  std::vector<int> test;
  std::uint64_t seed = 0;
  std::string warning;  // set when the validation size was shrunk
};

namespace detail {

// Unbiased draw from [0, n) that does not depend on the standard library's
// distribution implementation.
inline std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % n;
}

}  // namespace detail

inline int validation_count(int n_target, int validation_size = kValidationSize,
                            int nominal_target = kNominalTargetSize) {
  if (n_target >= nominal_target) return validation_size;
  return static_cast<int>(std::lround(static_cast<double>(n_target) * validation_size / nominal_target));
}

/// Uniform random partition without replacement. Targets smaller than the
/// nominal 316 keep the 160/316 validation fraction.
inline SplitSpec make_splits(int n_target, std::uint64_t seed, int validation_size = kValidationSize,
                             int nominal_target = kNominalTargetSize) {
  require(n_target >= 1, "make_splits: empty target set");
  require(validation_size >= 0 && nominal_target >= 1, "make_splits: bad split sizes");
  SplitSpec s;
  s.seed = seed;
  const int n_val = validation_count(n_target, validation_size, nominal_target);
  if (n_val != validation_size)
    s.warning = "target set has " + std::to_string(n_target) + " records; validation shrunk to " +
                std::to_string(n_val);
  std::vector<int> order(static_cast<std::size_t>(n_target));
  for (int i = 0; i < n_target; ++i) order[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[detail::below(rng, i + 1)]);
  s.validation.assign(order.begin(), order.begin() + n_val);
  s.test.assign(order.begin() + n_val, order.end());
  return s;
}

}  // namespace gridfault::evalharness
