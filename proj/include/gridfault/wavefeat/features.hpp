#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gridfault/wavefeat/components.hpp"

namespace gridfault::wavefeat {

inline constexpr int kFeaturesPerChannel = 9;
inline constexpr int kFeatureDim = kFeaturesPerChannel * kNumChannels;  // 54

inline constexpr std::array<const char*, kFeaturesPerChannel> kFeatureNames = {
    "A_o", "f_o", "A_off", "A_p", "t_p", "A_h", "f_h", "w_d", "gap"};

struct FeatureVector {
  std::vector<double> values;  // kFeatureDim entries
  std::string record_id;
  Domain domain = Domain::Source;
  std::optional<Category> label;
};

/// Column name of feature slot `i`, e.g. "A_p[U_B]".
inline std::string feature_name(int i) {
  return std::string(kFeatureNames[i % kFeaturesPerChannel]) + "[" +
         kChannelNames[i / kFeaturesPerChannel] + "]";
}

/// Per channel: [A_o, f_o, A_off, A_p*, t_p*, A_h, f_h, w_d, gap*] where
/// the starred slots come from the highest-peak pulse and the mean interval.
inline FeatureVector featurize(const RecordComponents& components) {
  FeatureVector fv;
  fv.values.reserve(kFeatureDim);
  for (const ComponentSet& cs : components) {
    const Pulse* top = nullptr;
    for (const Pulse& p : cs.pulses)
      if (!top || p.peak > top->peak) top = &p;
    double gap = 0.0;
    if (!cs.intervals.empty()) {
      for (double t : cs.intervals) gap += t;
      gap /= static_cast<double>(cs.intervals.size());
    }
    fv.values.insert(fv.values.end(),
                     {cs.fundamental_amplitude, cs.fundamental_frequency, cs.offset_amplitude,
                      top ? top->peak : 0.0, top ? top->width : 0.0, cs.harmonic_amplitude,
                      cs.harmonic_frequency, cs.distortion, gap});
  }
  return fv;
}

/// Resample (when needed), decompose and featurize one record.
inline FeatureVector record_features(const WaveformRecord& record, double analysis_fs = 4000.0) {
  const WaveformRecord& r = record.fs == analysis_fs ? record : resample(record, analysis_fs);
  FeatureVector fv = featurize(extract_components(r));
  fv.record_id = record.id;
  fv.domain = record.domain;
  fv.label = record.label;
  return fv;
}

}  // namespace gridfault::wavefeat
