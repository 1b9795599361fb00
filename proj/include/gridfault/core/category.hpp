#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "gridfault/core/error.hpp"

namespace gridfault {

/// Event categories. Index order is significant: it is the row order of
/// classifier heads and the tie-break order for every argmax.
enum class Category : int { SIF = 0, MIF = 1, PF = 2, TD = 3 };

inline constexpr int kNumCategories = 4;
inline constexpr std::array<Category, kNumCategories> kAllCategories = {
    Category::SIF, Category::MIF, Category::PF, Category::TD};

inline constexpr int index_of(Category c) { return static_cast<int>(c); }

inline Category category_from_index(int i) {
  require(i >= 0 && i < kNumCategories,
          "category index out of range: " + std::to_string(i));
  return static_cast<Category>(i);
}

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::SIF: return "SIF";
    case Category::MIF: return "MIF";
    case Category::PF: return "PF";
    case Category::TD: return "TD";
  }
  return "?";
}

inline Category parse_category(std::string_view s) {
  for (Category c : kAllCategories)
    if (to_string(c) == s) return c;
  fail(ErrorKind::Format, "unknown category '" + std::string(s) + "'");
}

enum class Domain { Source, Shifted };

inline std::string_view to_string(Domain d) {
  return d == Domain::Source ? "source" : "shifted";
}

inline Domain parse_domain(std::string_view s) {
  if (s == "source") return Domain::Source;
  if (s == "shifted") return Domain::Shifted;
  fail(ErrorKind::Format, "unknown domain '" + std::string(s) + "'");
}

}  // namespace gridfault
