#pragma once

// Text record format:
//
//   id: <string>
//   fs: <hertz>
//   f_nominal: <hertz>
//   n_samples: <count>
//   label: <SIF|MIF|PF|TD|->
//   domain: <source|shifted>
//   meta.<key>: <value>          (zero or more)
//   channels: I_A I_B I_C U_A U_B U_C
//   <n_samples rows of six space-separated numbers>

#include <filesystem>
#include <sstream>
#include <string>

#include "gridfault/arcsim/waveform.hpp"
#include "gridfault/core/text.hpp"

namespace gridfault::arcsim {

inline std::string serialize_record(const WaveformRecord& r) {
  using text::format_double;
  std::string out;
  out.reserve(r.n_samples() * 6 * 20 + 512);
  out += "id: " + r.id + "\n";
  out += "fs: " + format_double(r.fs) + "\n";
  out += "f_nominal: " + format_double(r.nominal_frequency) + "\n";
  out += "n_samples: " + std::to_string(r.n_samples()) + "\n";
  out += "label: " + (r.label ? std::string(to_string(*r.label)) : std::string("-")) + "\n";
  out += "domain: " + std::string(to_string(r.domain)) + "\n";
  for (const auto& [k, v] : r.meta) out += "meta." + k + ": " + v + "\n";
  out += "channels:";
  for (const char* name : kChannelNames) out += std::string(" ") + name;
  out += "\n";
  for (std::size_t i = 0; i < r.n_samples(); ++i) {
    for (int c = 0; c < kNumChannels; ++c) {
      if (c) out += ' ';
      out += format_double(r.channels[c][i]);
    }
    out += '\n';
  }
  return out;
}

inline WaveformRecord parse_record(const std::string& content) {
  WaveformRecord r;
  std::istringstream in(content);
  std::string line;
  long long n = -1;
  bool saw_channels = false;
  while (std::getline(in, line)) {
    auto colon = line.find(':');
    if (colon == std::string::npos) fail(ErrorKind::Format, "malformed record header line: " + line);
    std::string key = line.substr(0, colon);
    std::string value(text::trim(std::string_view(line).substr(colon + 1)));
    if (key == "id") r.id = value;
    else if (key == "fs") r.fs = text::parse_double(value);
    else if (key == "f_nominal") r.nominal_frequency = text::parse_double(value);
    else if (key == "n_samples") n = text::parse_int(value);
    else if (key == "label") { if (value != "-") r.label = parse_category(value); }
    else if (key == "domain") r.domain = parse_domain(value);
    else if (key.rfind("meta.", 0) == 0) r.meta.emplace_back(key.substr(5), value);
    else if (key == "channels") {
      std::istringstream names(value);
      std::string name;
      for (const char* expected : kChannelNames) {
        names >> name;
        if (name != expected) fail(ErrorKind::Format, "unexpected channel order in record " + r.id);
      }
      saw_channels = true;
      break;
    } else {
      fail(ErrorKind::Format, "unknown record field '" + key + "'");
    }
  }
  if (!saw_channels || n < 0) fail(ErrorKind::Format, "record header incomplete");
  for (auto& c : r.channels) c.resize(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) fail(ErrorKind::Format, "record " + r.id + " truncated");
    auto fields = text::split(text::trim(line), ' ');
    if (fields.size() != kNumChannels) fail(ErrorKind::Format, "record " + r.id + ": bad sample row");
    for (int c = 0; c < kNumChannels; ++c)
      r.channels[c][static_cast<std::size_t>(i)] = text::parse_double(fields[c]);
  }
  validate(r);
  return r;
}

inline void write_record(const std::filesystem::path& path, const WaveformRecord& r) {
  text::write_file_atomic(path, serialize_record(r));
}

inline WaveformRecord read_record(const std::filesystem::path& path) {
  return parse_record(text::read_file(path));
}

}  // namespace gridfault::arcsim
