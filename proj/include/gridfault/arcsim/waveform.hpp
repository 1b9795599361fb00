#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridfault/core/category.hpp"
#include "gridfault/core/error.hpp"

namespace gridfault {

inline constexpr int kNumChannels = 6;
inline constexpr int kRecordCycles = 16;
inline constexpr std::array<const char*, kNumChannels> kChannelNames = {"I_A", "I_B", "I_C",
                                                                       "U_A", "U_B", "U_C"};

/// Samples a recorder captures for sixteen nominal cycles.
inline std::size_t record_length(double fs, double nominal_frequency = 50.0) {
  return static_cast<std::size_t>(std::floor(kRecordCycles * fs / nominal_frequency + 1e-9));
}

using Meta = std::vector<std::pair<std::string, std::string>>;

/// Six-channel recording: currents I_A..I_C (A) then voltages U_A..U_C (V).
struct WaveformRecord {
  std::string id;
  double fs = 0.0;
  double nominal_frequency = 50.0;
  std::array<std::vector<double>, kNumChannels> channels;
  std::optional<Category> label;
  Domain domain = Domain::Source;
  Meta meta;

  std::size_t n_samples() const { return channels[0].size(); }

  std::string meta_value(const std::string& key) const {
    for (const auto& [k, v] : meta)
      if (k == key) return v;
    return {};
  }
};

inline void validate(const WaveformRecord& r) {
  require(!r.id.empty(), "record id is empty", ErrorKind::Format);
  require(r.fs > 0 && std::isfinite(r.fs), "record " + r.id + ": fs must be positive",
          ErrorKind::Format);
  const std::size_t n = r.channels[0].size();
  for (const auto& ch : r.channels) {
    require(ch.size() == n, "record " + r.id + ": channel lengths differ", ErrorKind::Format);
    for (double x : ch)
      require(std::isfinite(x), "record " + r.id + ": non-finite sample", ErrorKind::Format);
  }
  require(n == record_length(r.fs, r.nominal_frequency),
          "record " + r.id + ": expected " + std::to_string(record_length(r.fs, r.nominal_frequency)) +
              " samples, got " + std::to_string(n),
          ErrorKind::Format);
}

}  // namespace gridfault
