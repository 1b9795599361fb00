#pragma once

// Feature file: CSV with a header row
//   record_id,domain,label,A_o[I_A],f_o[I_A],...,gap[U_C]
// The label column is empty for unlabeled rows.

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "gridfault/core/text.hpp"
#include "gridfault/wavefeat/features.hpp"

namespace gridfault::wavefeat {

inline std::string feature_header(std::size_t dim = kFeatureDim) {
  std::string h = "record_id,domain,label";
  for (std::size_t i = 0; i < dim; ++i)
    h += "," + (dim == kFeatureDim ? feature_name(static_cast<int>(i)) : "x" + std::to_string(i));
  return h;
}

inline std::string serialize_features(const std::vector<FeatureVector>& rows) {
  std::string out = feature_header(rows.empty() ? kFeatureDim : rows.front().values.size()) + "\n";
  for (const auto& fv : rows) {
    out += fv.record_id + "," + std::string(to_string(fv.domain)) + "," +
           (fv.label ? std::string(to_string(*fv.label)) : std::string());
    for (double v : fv.values) out += "," + text::format_double(v);
    out += "\n";
  }
  return out;
}

inline std::vector<FeatureVector> parse_features(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Format, "feature file is empty");
  const auto header = text::split(text::trim(line), ',');
  if (header.size() < 4 || header[0] != "record_id" || header[1] != "domain" || header[2] != "label")
    fail(ErrorKind::Format, "feature file header malformed");
  const std::size_t dim = header.size() - 3;
  std::vector<FeatureVector> rows;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    const auto f = text::split(text::trim(line), ',');
    if (f.size() != header.size()) fail(ErrorKind::Format, "feature row has wrong column count: " + f[0]);
    FeatureVector fv;
    fv.record_id = f[0];
    fv.domain = parse_domain(f[1]);
    if (!f[2].empty()) fv.label = parse_category(f[2]);
    fv.values.reserve(dim);
    for (std::size_t i = 3; i < f.size(); ++i) fv.values.push_back(text::parse_double(f[i]));
    rows.push_back(std::move(fv));
  }
  return rows;
}

inline void write_features(const std::filesystem::path& path, const std::vector<FeatureVector>& rows) {
  text::write_file_atomic(path, serialize_features(rows));
}

inline std::vector<FeatureVector> read_features(const std::filesystem::path& path) {
  return parse_features(text::read_file(path));
}

}  // namespace gridfault::wavefeat
