#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gridfault/arcsim/dataset.hpp"
#include "gridfault/cli/config.hpp"
#include "gridfault/evalharness/report.hpp"
#include "gridfault/wavefeat/feature_io.hpp"
#include "gridfault/wavefeat/normalizer.hpp"

namespace gridfault::cli {

inline constexpr const char* kFeatureVersion = "gridfault-wavefeat/1";
inline constexpr const char* kFeaturesName = "features.csv";
inline constexpr const char* kStageKeyName = "stage.key";

using LogFn = std::function<void(const std::string&)>;

/// Raw (unnormalized) features for every record of a dataset directory, in
/// manifest order.
inline std::vector<wavefeat::FeatureVector> features_from_dataset(const std::filesystem::path& dir,
                                                                  double resample) {
  const auto manifest = arcsim::read_manifest(dir);
  std::vector<wavefeat::FeatureVector> out;
  out.reserve(manifest.records.size());
  for (const auto& e : manifest.records)
    out.push_back(wavefeat::record_features(arcsim::read_record(dir / e.file), resample));
  return out;
}

struct PreparedInputs {
  wavefeat::Normalizer normalizer;
  std::vector<wavefeat::FeatureVector> source;
  std::vector<wavefeat::FeatureVector> target;
};

/// Fits one normalizer over source and target rows together and splits the
/// normalized rows by domain tag.
inline PreparedInputs prepare_inputs(const std::vector<wavefeat::FeatureVector>& raw) {
  PreparedInputs p;
  p.normalizer = wavefeat::fit_normalizer(raw);
  for (auto& fv : wavefeat::apply_normalizer(p.normalizer, raw))
    (fv.domain == Domain::Source ? p.source : p.target).push_back(std::move(fv));
  return p;
}

struct StageResult {
  std::string stage;
  bool cached = false;
  std::string key;
  std::filesystem::path output;
};

struct PipelineResult {
  std::vector<StageResult> stages;
  std::vector<evalharness::ExperimentReport> reports;  // one per protocol, in config order
};

namespace detail {

inline bool stage_done(const std::filesystem::path& dir, const std::string& key) {
  std::error_code ec;
  if (!std::filesystem::exists(dir / kStageKeyName, ec)) return false;
  return text::trim(text::read_file(dir / kStageKeyName)) == key;
}

// Written last, so an interrupted stage is never mistaken for a finished one.
inline void mark_done(const std::filesystem::path& dir, const std::string& key) {
  text::write_file_atomic(dir / kStageKeyName, key + "\n");
}

template <class Fn>
StageResult run_stage(const std::string& name, const std::string& key, const std::filesystem::path& dir, Fn body) {
  StageResult r{name, stage_done(dir, key), key, dir};
  if (r.cached) return r;
  try {
    body();
    mark_done(dir, key);
  } catch (const Error& e) {
    fail(e.kind(), "stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    fail(ErrorKind::Io, "stage " + name + ": " + e.what());
  }
  return r;
}

}  // namespace detail

inline std::string simulate_key(const PipelineConfig& c, std::uint64_t seed) {
  return Fnv1a{}.update("simulate").update(c.simulate.fingerprint()).update(seed).hex();
}

inline std::string extract_key(const PipelineConfig& c, const std::string& simulate) {
  return Fnv1a{}.update("extract").update(simulate).update(kFeatureVersion).update(text::format_double(c.resample)).hex();
}

inline evalharness::ExperimentConfig experiment_config(const PipelineConfig& c, int protocol, std::uint64_t seed) {
  evalharness::ExperimentConfig e = c.evaluate;
  e.protocol = protocol;
  e.seed = seed;
  e.apl = c.train;
  return e;
}

inline std::string evaluate_key(const evalharness::ExperimentConfig& e, const std::string& extract) {
  return Fnv1a{}.update("evaluate").update(extract).update(evalharness::kCodeVersion).update(evalharness::describe(e)).hex();
}

/// simulate -> extract -> evaluate (one run per configured protocol). Each
/// stage writes into `out/<stage>-<key>/` and is skipped when that directory
/// already holds a finished stage with the same key.
inline PipelineResult run_pipeline(const PipelineConfig& c, std::uint64_t seed, const LogFn& log = {}) {
  validate(c);
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  const std::filesystem::path out = c.out;
  PipelineResult result;

  const std::string sk = simulate_key(c, seed);
  const auto sim_dir = out / ("simulate-" + sk);
  result.stages.push_back(detail::run_stage("simulate", sk, sim_dir, [&] {
    say("simulate: generating records");
    arcsim::generate_dataset(c.simulate, seed, sim_dir);
  }));

  const std::string ek = extract_key(c, sk);
  const auto ext_dir = out / ("extract-" + ek);
  result.stages.push_back(detail::run_stage("extract", ek, ext_dir, [&] {
    say("extract: computing features");
    wavefeat::write_features(ext_dir / kFeaturesName, features_from_dataset(sim_dir, c.resample));
  }));

  std::optional<PreparedInputs> inputs;
  for (int protocol : c.protocols) {
    const auto e = experiment_config(c, protocol, seed);
    const std::string vk = evaluate_key(e, ek);
    const auto ev_dir = out / ("evaluate-p" + std::to_string(protocol) + "-" + vk);
    result.stages.push_back(detail::run_stage("evaluate-p" + std::to_string(protocol), vk, ev_dir, [&] {
      if (!inputs) inputs = prepare_inputs(wavefeat::read_features(ext_dir / kFeaturesName));
      say("evaluate: protocol " + std::to_string(protocol));
      const auto report = evalharness::run_experiment(e, inputs->source, inputs->target, log);
      evalharness::emit_report(report, ev_dir);
    }));
    result.reports.push_back(evalharness::read_report(ev_dir));
  }
  return result;
}

}  // namespace gridfault::cli
