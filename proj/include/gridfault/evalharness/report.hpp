#pragma once

// Report directory contents:
//   report.json  full report, the input for re-rendering
//   summary.csv  one row per model: mean/min/max macro F1 and per-category means
//   table.txt    the same numbers laid out for reading
//   scatter.csv  one row per model and repetition, for distribution plots

#include <cstdio>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "gridfault/core/text.hpp"
#include "gridfault/evalharness/experiment.hpp"

namespace gridfault::evalharness {

inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kSummaryCsv = "summary.csv";
inline constexpr const char* kTableTxt = "table.txt";
inline constexpr const char* kScatterCsv = "scatter.csv";

namespace detail {

inline std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline std::string degenerate_list(const F1Scores& f) {
  std::string s;
  for (int k = 0; k < kNumCategories; ++k)
    if (f.degenerate[static_cast<std::size_t>(k)])
      s += (s.empty() ? "" : ";") + std::string(to_string(category_from_index(k)));
  return s;
}

// Quotes a free-text CSV field when it would otherwise split the row.
inline std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char ch : v) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

}  // namespace detail

inline nlohmann::json report_to_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["protocol"] = r.protocol;
  j["repetitions"] = r.repetitions;
  j["seed"] = r.seed;
  j["fingerprint"] = r.fingerprint;
  j["warnings"] = r.warnings;
  j["refused_label_reads"] = r.refused_label_reads;
  j["models"] = nlohmann::json::array();
  for (const auto& m : r.models) {
    nlohmann::json jm;
    jm["model"] = std::string(to_string(m.model));
    jm["repetitions"] = nlohmann::json::array();
    for (const auto& rep : m.repetitions) {
      nlohmann::json jr;
      jr["repetition"] = rep.repetition;
      jr["split_seed"] = rep.split_seed;
      jr["complete"] = rep.complete;
      jr["diagnostic"] = rep.diagnostic;
      jr["selection"] = rep.selection;
      jr["n_test"] = rep.n_test;
      jr["f1"] = rep.f1.per_category;
      jr["degenerate"] = rep.f1.degenerate;
      jr["macro"] = rep.f1.macro;
      jm["repetitions"].push_back(std::move(jr));
    }
    j["models"].push_back(std::move(jm));
  }
  return j;
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  try {
    ExperimentReport r;
    r.protocol = j.at("protocol").get<int>();
    r.repetitions = j.at("repetitions").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    r.refused_label_reads = j.at("refused_label_reads").get<int>();
    for (const auto& jm : j.at("models")) {
      ModelReport m;
      m.model = parse_model_kind(jm.at("model").get<std::string>());
      for (const auto& jr : jm.at("repetitions")) {
        RepetitionResult rep;
        rep.repetition = jr.at("repetition").get<int>();
        rep.split_seed = jr.at("split_seed").get<std::uint64_t>();
        rep.complete = jr.at("complete").get<bool>();
        rep.diagnostic = jr.at("diagnostic").get<std::string>();
        rep.selection = jr.at("selection").get<std::string>();
        rep.n_test = jr.at("n_test").get<int>();
        rep.f1.per_category = jr.at("f1").get<std::array<double, kNumCategories>>();
        rep.f1.degenerate = jr.at("degenerate").get<std::array<bool, kNumCategories>>();
        rep.f1.macro = jr.at("macro").get<double>();
        m.repetitions.push_back(std::move(rep));
      }
      r.models.push_back(std::move(m));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("report.json: ") + e.what());
  }
}

inline std::string render_summary_csv(const ExperimentReport& r) {
  std::string out = "model,protocol,repetitions_complete,repetitions_total,macro_mean,macro_min,macro_max";
  for (auto c : kAllCategories) out += ",f1_" + std::string(to_string(c));
  out += "\n";
  for (const auto& m : r.models) {
    const Spread s = macro_spread(m);
    out += std::string(to_string(m.model)) + "," + std::to_string(r.protocol) + "," + std::to_string(s.count) +
           "," + std::to_string(m.repetitions.size()) + "," + detail::fixed(s.mean, 6) + "," +
           detail::fixed(s.min, 6) + "," + detail::fixed(s.max, 6);
    for (double v : category_means(m)) out += "," + detail::fixed(v, 6);
    out += "\n";
  }
  return out;
}

inline std::string render_scatter_csv(const ExperimentReport& r) {
  std::string out = "model,repetition,complete,macro_f1";
  for (auto c : kAllCategories) out += ",f1_" + std::string(to_string(c));
  out += ",degenerate,selection\n";
  for (const auto& m : r.models)
    for (const auto& rep : m.repetitions) {
      out += std::string(to_string(m.model)) + "," + std::to_string(rep.repetition) + "," +
             (rep.complete ? "1" : "0") + "," + detail::fixed(rep.f1.macro, 6);
      for (double v : rep.f1.per_category) out += "," + detail::fixed(v, 6);
      out += "," + detail::degenerate_list(rep.f1) + "," + detail::csv_field(rep.selection) + "\n";
    }
  return out;
}

inline std::string render_table(const ExperimentReport& r) {
  char line[256];
  std::string out = "protocol " + std::to_string(r.protocol) + ", " + std::to_string(r.repetitions) +
                    " repetitions, seed " + std::to_string(r.seed) + ", fingerprint " + r.fingerprint + "\n\n";
  std::snprintf(line, sizeof(line), "%-6s %8s %8s %8s %8s   %-8s %-8s %s\n", "model", "SIF", "MIF", "PF", "TD",
                "macro", "min", "max");
  out += line;
  for (const auto& m : r.models) {
    const auto c = category_means(m);
    const Spread s = macro_spread(m);
    std::snprintf(line, sizeof(line), "%-6s %8.4f %8.4f %8.4f %8.4f   %-8.4f %-8.4f %.4f\n",
                  std::string(to_string(m.model)).c_str(), c[0], c[1], c[2], c[3], s.mean, s.min, s.max);
    out += line;
  }
  bool any_incomplete = false;
  for (const auto& m : r.models)
    for (const auto& rep : m.repetitions)
      if (!rep.complete) {
        if (!any_incomplete) out += "\nincomplete repetitions:\n";
        any_incomplete = true;
        out += "  " + std::string(to_string(m.model)) + " #" + std::to_string(rep.repetition) + ": " +
               rep.diagnostic + "\n";
      }
  bool any_degenerate = false;
  for (const auto& m : r.models)
    for (const auto& rep : m.repetitions)
      if (rep.complete && !detail::degenerate_list(rep.f1).empty()) any_degenerate = true;
  if (any_degenerate) out += "\nsome categories were absent from a test split; their F1 is counted as 0\n";
  for (const auto& w : r.warnings) out += "\nwarning: " + w + "\n";
  return out;
}

/// Writes all four report files into `dir` (created if needed).
inline void emit_report(const ExperimentReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create report directory " + dir.string() + ": " + ec.message());
  text::write_file_atomic(dir / kReportJson, report_to_json(r).dump(2) + "\n");
  text::write_file_atomic(dir / kSummaryCsv, render_summary_csv(r));
  text::write_file_atomic(dir / kTableTxt, render_table(r));
  text::write_file_atomic(dir / kScatterCsv, render_scatter_csv(r));
}

inline ExperimentReport read_report(const std::filesystem::path& dir) {
  const std::string body = text::read_file(dir / kReportJson);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("report.json: ") + e.what());
  }
  return report_from_json(j);
}

}  // namespace gridfault::evalharness
