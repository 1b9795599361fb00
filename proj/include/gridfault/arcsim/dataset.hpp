#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridfault/arcsim/record_io.hpp"
#include "gridfault/arcsim/simulate.hpp"
#include "gridfault/core/hash.hpp"

namespace gridfault::arcsim {

inline constexpr const char* kGeneratorVersion = "gridfault-arcsim/1";

using CategoryCounts = std::array<int, kNumCategories>;

struct DomainConfig {
  CategoryCounts counts{};
  double fs = 4000.0;
  bool enabled = true;
};

/// Parameter ranges for synthesis. The shifted block describes how the
/// pseudo-field domain departs from the simulated one.
struct GenerationConfig {
  DomainConfig source{{80, 80, 80, 80}, 4000.0, true};
  DomainConfig shifted{{71, 64, 93, 88}, 4096.0, true};
  CircuitParams circuit{};

  double source_snr_db = 45.0;
  double source_load_spread = 0.1;  // load resistance scaled by U[1-x, 1+x]

  double shifted_impedance_spread = 0.3;
  double shifted_snr_min = 25.0, shifted_snr_max = 40.0;
  double shifted_frequency_min = 49.8, shifted_frequency_max = 50.2;
  double shifted_gain_spread = 0.05;

  std::string fingerprint() const {
    using text::format_double;
    Fnv1a h;
    h.update(kGeneratorVersion);
    for (const DomainConfig* d : {&source, &shifted}) {
      h.update(std::uint64_t(d->enabled));
      for (int c : d->counts) h.update(std::uint64_t(c));
      h.update(format_double(d->fs));
    }
    for (double v : {circuit.source_peak_voltage, circuit.system_frequency, circuit.nominal_frequency,
                     circuit.source_resistance, circuit.source_inductance, circuit.line_resistance,
                     circuit.line_inductance, circuit.load_resistance, source_snr_db,
                     source_load_spread, shifted_impedance_spread, shifted_snr_min, shifted_snr_max,
                     shifted_frequency_min, shifted_frequency_max, shifted_gain_spread})
      h.update(format_double(v));
    return h.hex();
  }
};

/// Index over a generated dataset. `records` is in generation order:
/// source domain first, categories in index order.
struct DatasetManifest {
  struct Entry {
    std::string id;
    std::string file;  // relative to the dataset directory
    std::optional<Category> label;
    Domain domain = Domain::Source;
    double fs = 0.0;
    std::size_t n_samples = 0;
  };
  std::vector<Entry> records;
  std::uint64_t seed = 0;
  std::string generator_version = kGeneratorVersion;
  std::string config_fingerprint;

  CategoryCounts counts(Domain d) const {
    CategoryCounts out{};
    for (const auto& e : records)
      if (e.domain == d && e.label) ++out[index_of(*e.label)];
    return out;
  }
};

namespace detail {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline EventSpec draw_event(Category cat, Domain domain, double fs, std::mt19937_64& rng) {
  EventSpec spec;
  spec.category = cat;
  spec.domain = domain;
  spec.fs = fs;
  spec.fault_start_angle = uniform(rng, 0.0, 360.0);
  switch (cat) {
    case Category::SIF: spec.fault_duration_cycles = uniform(rng, 0.05, 1.0); break;
    case Category::MIF: spec.fault_duration_cycles = uniform(rng, 1.5, 4.0); break;
    default: spec.fault_duration_cycles = 1.0; break;
  }
  if (cat == Category::TD) {
    spec.transient.frequency = uniform(rng, 300.0, 900.0);
    spec.transient.decay = uniform(rng, 3e-3, 10e-3);
    spec.transient.relative_amplitude = uniform(rng, 0.2, 0.6);
  } else {
    const double tau = uniform(rng, kTauMin, kTauMax);
    const double u_o = uniform(rng, kUoMin, kUoMax);
    const double r_o = uniform(rng, kRoMin, kRoMax);
    spec.arc.emplace(tau, u_o, r_o);
  }
  return spec;
}

}  // namespace detail

/// Draws the full (EventSpec, CircuitParams) scenario for one record and
/// simulates it. Pure function of (config, domain, category, index, seed).
inline WaveformRecord generate_record(const GenerationConfig& cfg, Domain domain, Category cat,
                                      int index, std::uint64_t seed) {
  const std::uint64_t salt = (domain == Domain::Source ? 0ULL : 1ULL) << 40 |
                             std::uint64_t(index_of(cat)) << 32 | std::uint64_t(index);
  const std::uint64_t record_seed = mix_seed(seed, salt);
  std::mt19937_64 rng(record_seed);
  using detail::uniform;

  const DomainConfig& dc = domain == Domain::Source ? cfg.source : cfg.shifted;
  EventSpec spec = detail::draw_event(cat, domain, dc.fs, rng);
  CircuitParams circuit = cfg.circuit;

  if (domain == Domain::Source) {
    circuit.load_resistance *= uniform(rng, 1.0 - cfg.source_load_spread, 1.0 + cfg.source_load_spread);
    spec.noise_snr_db = cfg.source_snr_db;
  } else {
    const double s = cfg.shifted_impedance_spread;
    circuit.load_resistance *= uniform(rng, 1.0 - cfg.source_load_spread, 1.0 + cfg.source_load_spread);
    circuit.source_resistance *= uniform(rng, 1.0 - s, 1.0 + s);
    circuit.source_inductance *= uniform(rng, 1.0 - s, 1.0 + s);
    circuit.line_resistance *= uniform(rng, 1.0 - s, 1.0 + s);
    circuit.line_inductance *= uniform(rng, 1.0 - s, 1.0 + s);
    circuit.system_frequency = uniform(rng, cfg.shifted_frequency_min, cfg.shifted_frequency_max);
    spec.noise_snr_db = uniform(rng, cfg.shifted_snr_min, cfg.shifted_snr_max);
    for (double& g : spec.channel_gain)
      g = uniform(rng, 1.0 - cfg.shifted_gain_spread, 1.0 + cfg.shifted_gain_spread);
  }

  WaveformRecord rec = simulate_event(spec, circuit, mix_seed(record_seed, 7));
  char id[64];
  std::snprintf(id, sizeof(id), "%s-%s-%04d", domain == Domain::Source ? "src" : "fld",
                std::string(to_string(cat)).c_str(), index + 1);
  rec.id = id;
  return rec;
}

/// Generates every enabled record in manifest order.
inline std::vector<WaveformRecord> generate_records(const GenerationConfig& cfg, std::uint64_t seed) {
  std::vector<WaveformRecord> out;
  for (Domain d : {Domain::Source, Domain::Shifted}) {
    const DomainConfig& dc = d == Domain::Source ? cfg.source : cfg.shifted;
    if (!dc.enabled) continue;
    for (Category c : kAllCategories) {
      require(dc.counts[index_of(c)] >= 0, "per-category counts must be non-negative");
      for (int i = 0; i < dc.counts[index_of(c)]; ++i) out.push_back(generate_record(cfg, d, c, i, seed));
    }
  }
  return out;
}

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
  nlohmann::json j;
  j["generator_version"] = m.generator_version;
  j["seed"] = m.seed;
  j["config_fingerprint"] = m.config_fingerprint;
  for (Domain d : {Domain::Source, Domain::Shifted}) {
    auto counts = m.counts(d);
    nlohmann::json cj = nlohmann::json::object();
    for (Category c : kAllCategories) cj[std::string(to_string(c))] = counts[index_of(c)];
    j["counts"][std::string(to_string(d))] = cj;
  }
  j["records"] = nlohmann::json::array();
  for (const auto& e : m.records) {
    j["records"].push_back({{"id", e.id},
                            {"file", e.file},
                            {"label", e.label ? std::string(to_string(*e.label)) : std::string("-")},
                            {"domain", std::string(to_string(e.domain))},
                            {"fs", e.fs},
                            {"n_samples", e.n_samples}});
  }
  return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  try {
    m.generator_version = j.at("generator_version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_fingerprint = j.value("config_fingerprint", "");
    for (const auto& r : j.at("records")) {
      DatasetManifest::Entry e;
      e.id = r.at("id").get<std::string>();
      e.file = r.at("file").get<std::string>();
      auto label = r.at("label").get<std::string>();
      if (label != "-") e.label = parse_category(label);
      e.domain = parse_domain(r.at("domain").get<std::string>());
      e.fs = r.at("fs").get<double>();
      e.n_samples = r.at("n_samples").get<std::size_t>();
      m.records.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::Format, std::string("malformed manifest: ") + ex.what());
  }
  return m;
}

inline constexpr const char* kManifestName = "manifest.json";

/// Writes records under `dir/records/` plus `dir/manifest.json`.
inline DatasetManifest write_dataset(const std::filesystem::path& dir,
                                     const std::vector<WaveformRecord>& records, std::uint64_t seed,
                                     const std::string& fingerprint = {}) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "records", ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + (dir / "records").string() + ": " + ec.message());
  DatasetManifest m;
  m.seed = seed;
  m.config_fingerprint = fingerprint;
  for (const auto& r : records) {
    std::string file = "records/" + r.id + ".rec";
    write_record(dir / file, r);
    m.records.push_back({r.id, file, r.label, r.domain, r.fs, r.n_samples()});
  }
  text::write_file_atomic(dir / kManifestName, manifest_to_json(m).dump(2) + "\n");
  return m;
}

/// Generates a dataset and writes it to `dir`. Deterministic in (config, seed).
inline DatasetManifest generate_dataset(const GenerationConfig& cfg, std::uint64_t seed,
                                        const std::filesystem::path& dir) {
  return write_dataset(dir, generate_records(cfg, seed), seed, cfg.fingerprint());
}

inline DatasetManifest read_manifest(const std::filesystem::path& dir) {
  auto content = text::read_file(dir / kManifestName);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::Format, std::string("manifest is not valid JSON: ") + ex.what());
  }
  return manifest_from_json(j);
}

inline std::vector<WaveformRecord> load_records(const std::filesystem::path& dir,
                                                const DatasetManifest& m) {
  std::vector<WaveformRecord> out;
  out.reserve(m.records.size());
  for (const auto& e : m.records) out.push_back(read_record(dir / e.file));
  return out;
}

}  // namespace gridfault::arcsim
