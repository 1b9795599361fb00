#pragma once

#include <span>
#include <vector>

#include "gridfault/core/category.hpp"
#include "gridfault/core/error.hpp"

namespace gridfault::evalharness {

/// Target labels behind an access gate. Reads fail with LabelAccess until
/// the relevant subset is released; every refused read is counted.
class GuardedLabels {
 public:
  explicit GuardedLabels(std::vector<Category> labels)
      : labels_(std::move(labels)), released_(labels_.size(), false) {}

  std::size_t size() const { return labels_.size(); }

  void release(std::span<const int> indices) {
    for (int i : indices) released_.at(static_cast<std::size_t>(i)) = true;
  }
  void release_all() { released_.assign(labels_.size(), true); }

  Category at(int i) const {
    const auto k = static_cast<std::size_t>(i);
    if (!released_.at(k)) {
      ++refused_;
      fail(ErrorKind::LabelAccess, "label of target record " + std::to_string(i) + " read before release");
    }
    return labels_[k];
  }

  std::vector<Category> gather(std::span<const int> indices) const {
    std::vector<Category> out;
    out.reserve(indices.size());
    for (int i : indices) out.push_back(at(i));
    return out;
  }

  int refused_reads() const { return refused_; }

 private:
  std::vector<Category> labels_;
  std::vector<bool> released_;
  mutable int refused_ = 0;
};

}  // namespace gridfault::evalharness
