#pragma once

// Flat key = value configuration. Lines starting with '#' are comments.
// Keys are grouped by prefix: simulate.*, extract.*, train.*, evaluate.*,
// report.*, plus the top-level `seed` and `out`. Unknown keys are errors.

#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gridfault/arcsim/dataset.hpp"
#include "gridfault/core/text.hpp"
#include "gridfault/evalharness/experiment.hpp"

namespace gridfault::cli {

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr const char* kSeedEnv = "GRIDFAULT_SEED";

struct PipelineConfig {
  std::optional<std::uint64_t> seed;
  std::string out = "gridfault-work";
  arcsim::GenerationConfig simulate;
  double resample = 4000.0;
  aplcore::Hyperparams train;
  evalharness::ExperimentConfig evaluate;  // its apl, protocol and seed fields are filled at run time
  std::vector<int> protocols = {1, 2};
  std::string report_format = "table";
};

namespace detail {

inline std::vector<int> parse_int_list(const std::string& v) {
  std::vector<int> out;
  for (const auto& f : text::split(v, ',')) out.push_back(static_cast<int>(text::parse_int(text::trim(f))));
  return out;
}

inline std::vector<double> parse_double_list(const std::string& v) {
  std::vector<double> out;
  for (const auto& f : text::split(v, ',')) out.push_back(text::parse_double(text::trim(f)));
  return out;
}

inline std::string join(const std::vector<int>& v) {
  std::string s;
  for (int x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + text::format_double(x);
  return s;
}

inline std::array<int, kNumCategories> parse_counts(const std::string& v) {
  const auto xs = parse_int_list(v);
  if (xs.size() != kNumCategories)
    fail(ErrorKind::InvalidArgument, "counts need four values (SIF,MIF,PF,TD), got '" + v + "'");
  std::array<int, kNumCategories> out{};
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (xs[i] < 0) fail(ErrorKind::InvalidArgument, "counts must be non-negative");
    out[i] = xs[i];
  }
  return out;
}

inline std::string join(const std::array<int, kNumCategories>& v) { return join(std::vector<int>(v.begin(), v.end())); }

inline bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  fail(ErrorKind::InvalidArgument, "expected a boolean, got '" + v + "'");
}

struct Key {
  const char* name;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

inline std::string domains_of(const PipelineConfig& c) {
  std::string s;
  if (c.simulate.source.enabled) s = "source";
  if (c.simulate.shifted.enabled) s += s.empty() ? "shifted" : ",shifted";
  return s;
}

inline void set_domains(PipelineConfig& c, const std::string& v) {
  c.simulate.source.enabled = c.simulate.shifted.enabled = false;
  for (const auto& f : text::split(v, ',')) {
    const Domain d = parse_domain(text::trim(f));
    (d == Domain::Source ? c.simulate.source : c.simulate.shifted).enabled = true;
  }
}

inline std::string models_of(const PipelineConfig& c) {
  std::string s;
  for (auto m : c.evaluate.models) s += (s.empty() ? "" : ",") + std::string(evalharness::to_string(m));
  return s;
}

inline std::vector<evalharness::ModelKind> parse_models(const std::string& v) {
  std::vector<evalharness::ModelKind> out;
  for (const auto& f : text::split(v, ',')) out.push_back(evalharness::parse_model_kind(text::trim(f)));
  return out;
}

#define GF_DOUBLE(name, field) \
  Key{name, [](PipelineConfig& c, const std::string& v) { c.field = text::parse_double(v); }, \
      [](const PipelineConfig& c) { return text::format_double(c.field); }}
#define GF_INT(name, field) \
  Key{name, [](PipelineConfig& c, const std::string& v) { c.field = static_cast<int>(text::parse_int(v)); }, \
      [](const PipelineConfig& c) { return std::to_string(c.field); }}

inline const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      Key{"seed", [](PipelineConfig& c, const std::string& v) { c.seed = std::stoull(v); },
          [](const PipelineConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string(); }},
      Key{"out", [](PipelineConfig& c, const std::string& v) { c.out = v; },
          [](const PipelineConfig& c) { return c.out; }},
      Key{"simulate.counts_source", [](PipelineConfig& c, const std::string& v) { c.simulate.source.counts = parse_counts(v); },
          [](const PipelineConfig& c) { return join(c.simulate.source.counts); }},
      Key{"simulate.counts_shifted", [](PipelineConfig& c, const std::string& v) { c.simulate.shifted.counts = parse_counts(v); },
          [](const PipelineConfig& c) { return join(c.simulate.shifted.counts); }},
      Key{"simulate.domains", set_domains, domains_of},
      GF_DOUBLE("simulate.fs_source", simulate.source.fs),
      GF_DOUBLE("simulate.fs_shifted", simulate.shifted.fs),
      GF_DOUBLE("simulate.source_snr_db", simulate.source_snr_db),
      GF_DOUBLE("simulate.source_load_spread", simulate.source_load_spread),
      GF_DOUBLE("simulate.impedance_spread", simulate.shifted_impedance_spread),
      GF_DOUBLE("simulate.snr_min_db", simulate.shifted_snr_min),
      GF_DOUBLE("simulate.snr_max_db", simulate.shifted_snr_max),
      GF_DOUBLE("simulate.frequency_min", simulate.shifted_frequency_min),
      GF_DOUBLE("simulate.frequency_max", simulate.shifted_frequency_max),
      GF_DOUBLE("simulate.gain_spread", simulate.shifted_gain_spread),
      GF_DOUBLE("extract.resample", resample),
      GF_INT("train.dim", train.dim),
      GF_DOUBLE("train.lw", train.lambda_w),
      GF_DOUBLE("train.lv", train.lambda_v),
      GF_DOUBLE("train.lr", train.learning_rate),
      GF_INT("train.epochs", train.max_epochs),
      GF_INT("train.patience", train.patience),
      Key{"evaluate.protocols",
          [](PipelineConfig& c, const std::string& v) {
            c.protocols = parse_int_list(v);
            for (int p : c.protocols)
              if (p != 1 && p != 2) fail(ErrorKind::InvalidArgument, "evaluate.protocols entries must be 1 or 2");
          },
          [](const PipelineConfig& c) { return join(c.protocols); }},
      GF_INT("evaluate.reps", evaluate.repetitions),
      Key{"evaluate.models", [](PipelineConfig& c, const std::string& v) { c.evaluate.models = parse_models(v); },
          models_of},
      GF_INT("evaluate.threads", evaluate.threads),
      Key{"evaluate.lv_grid", [](PipelineConfig& c, const std::string& v) { c.evaluate.lambda_v_grid = parse_double_list(v); },
          [](const PipelineConfig& c) { return join(c.evaluate.lambda_v_grid); }},
      Key{"evaluate.dim_grid", [](PipelineConfig& c, const std::string& v) { c.evaluate.dim_grid = parse_int_list(v); },
          [](const PipelineConfig& c) { return join(c.evaluate.dim_grid); }},
      Key{"evaluate.p2_dims", [](PipelineConfig& c, const std::string& v) { c.evaluate.protocol2_dims = parse_int_list(v); },
          [](const PipelineConfig& c) { return join(c.evaluate.protocol2_dims); }},
      GF_INT("evaluate.checkpoint_every", evaluate.checkpoint_every),
      Key{"evaluate.knn_k", [](PipelineConfig& c, const std::string& v) { c.evaluate.knn_candidates = parse_int_list(v); },
          [](const PipelineConfig& c) { return join(c.evaluate.knn_candidates); }},
      Key{"evaluate.svm_degrees", [](PipelineConfig& c, const std::string& v) { c.evaluate.svm_degrees = parse_int_list(v); },
          [](const PipelineConfig& c) { return join(c.evaluate.svm_degrees); }},
      GF_DOUBLE("evaluate.svm_c", evaluate.svm_c),
      Key{"report.format",
          [](PipelineConfig& c, const std::string& v) {
            if (v != "table" && v != "csv" && v != "scatter")
              fail(ErrorKind::InvalidArgument, "report.format must be table, csv or scatter");
            c.report_format = v;
          },
          [](const PipelineConfig& c) { return c.report_format; }},
  };
  return table;
}

#undef GF_DOUBLE
#undef GF_INT

}  // namespace detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : detail::keys()) out.emplace_back(k.name);
  return out;
}

inline void set_key(PipelineConfig& c, const std::string& key, const std::string& value) {
  for (const auto& k : detail::keys())
    if (key == k.name) {
      try {
        k.set(c, value);
      } catch (const Error& e) {
        fail(ErrorKind::InvalidArgument, key + ": " + e.what());
      } catch (const std::exception&) {
        fail(ErrorKind::InvalidArgument, key + ": invalid value '" + value + "'");
      }
      return;
    }
  fail(ErrorKind::InvalidArgument, "unknown configuration key '" + key + "'");
}

inline std::string get_key(const PipelineConfig& c, const std::string& key) {
  for (const auto& k : detail::keys())
    if (key == k.name) return k.get(c);
  fail(ErrorKind::InvalidArgument, "unknown configuration key '" + key + "'");
}

/// Checks cross-field constraints once all keys are applied.
inline void validate(const PipelineConfig& c) {
  require(!c.out.empty(), "out must not be empty");
  require(c.resample > 0, "extract.resample must be positive");
  require(!c.protocols.empty(), "evaluate.protocols must not be empty");
  require(c.simulate.source.enabled || c.simulate.shifted.enabled, "simulate.domains selects nothing");
  require(c.simulate.shifted_snr_min <= c.simulate.shifted_snr_max, "simulate.snr_min_db exceeds snr_max_db");
  require(c.simulate.shifted_frequency_min <= c.simulate.shifted_frequency_max,
          "simulate.frequency_min exceeds frequency_max");
  aplcore::validate(c.train);
  evalharness::ExperimentConfig e = c.evaluate;
  e.apl = c.train;
  evalharness::validate(e);
}

inline PipelineConfig parse_config(const std::string& content) {
  PipelineConfig c;
  int line_no = 0;
  for (const auto& raw : text::split(content, '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::InvalidArgument, "config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    try {
      set_key(c, key, value);
    } catch (const Error& e) {
      fail(e.kind(), "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate(c);
  return c;
}

inline PipelineConfig read_config(const std::filesystem::path& path) { return parse_config(text::read_file(path)); }

/// Every key with its current value, in table order. parse_config of the
/// result reproduces `c`.
inline std::string to_config_text(const PipelineConfig& c) {
  std::string out;
  for (const auto& k : detail::keys()) {
    const std::string v = k.get(c);
    if (std::string(k.name) == "seed" && v.empty()) continue;
    out += std::string(k.name) + " = " + v + "\n";
  }
  return out;
}

/// Seed precedence: command-line flag, then GRIDFAULT_SEED, then the config
/// file, then the built-in default.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const PipelineConfig& c) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kSeedEnv); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string_view(env).size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::InvalidArgument, std::string(kSeedEnv) + " is not an unsigned integer: '" + env + "'");
  }
  return c.seed.value_or(kDefaultSeed);
}

}  // namespace gridfault::cli
