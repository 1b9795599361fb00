#pragma once

// Model file layout (whitespace separated, one section per line group):
//
//   gridfault-model 1
//   dim <d> input_dim <D> categories <K>
//   hyper <lambda_w> <lambda_v> <learning_rate> <max_epochs> <patience> <seed>
//   W        then d lines of D values
//   head     then K lines of d values
//   bias     <K values>
//   norm_min <D values>
//   norm_max <D values>
//   bank <n>  then n lines: <label> <d values>
//   curve <epochs_run> <best_epoch> <early_stopped> <L_s> <L_w> <L_v> <L>

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <string>

#include "gridfault/aplcore/model.hpp"
#include "gridfault/core/text.hpp"

namespace gridfault::aplcore {

namespace detail {

inline void put_row(std::string& out, const Eigen::Ref<const Matrix>& m, Eigen::Index r) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (c) out += ' ';
    out += text::format_double(m(r, c));
  }
  out += '\n';
}

class Tokens {
 public:
  explicit Tokens(const std::string& s) : in_(s) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) fail(ErrorKind::Format, "model file truncated");
    return w;
  }
  void expect(std::string_view w) {
    const std::string got = word();
    if (got != w) fail(ErrorKind::Format, "model file: expected '" + std::string(w) + "', found '" + got + "'");
  }
  double real() { return text::parse_double(word()); }
  long long integer() { return text::parse_int(word()); }

 private:
  std::istringstream in_;
};

}  // namespace detail

inline std::string serialize_model(const EmbeddingModel& m) {
  const auto d = m.W.rows(), D = m.W.cols();
  std::string out = "gridfault-model 1\n";
  out += "dim " + std::to_string(d) + " input_dim " + std::to_string(D) + " categories " +
         std::to_string(m.head.rows()) + "\n";
  const Hyperparams& h = m.hyper;
  out += "hyper " + text::format_double(h.lambda_w) + " " + text::format_double(h.lambda_v) + " " +
         text::format_double(h.learning_rate) + " " + std::to_string(h.max_epochs) + " " +
         std::to_string(h.patience) + " " + std::to_string(h.seed) + "\n";
  out += "W\n";
  for (Eigen::Index r = 0; r < d; ++r) detail::put_row(out, m.W, r);
  out += "head\n";
  for (Eigen::Index r = 0; r < m.head.rows(); ++r) detail::put_row(out, m.head, r);
  out += "bias";
  for (Eigen::Index k = 0; k < m.bias.size(); ++k) out += " " + text::format_double(m.bias(k));
  out += "\nnorm_min";
  for (double v : m.normalizer.min) out += " " + text::format_double(v);
  out += "\nnorm_max";
  for (double v : m.normalizer.max) out += " " + text::format_double(v);
  out += "\nbank " + std::to_string(m.bank.rows()) + "\n";
  for (Eigen::Index i = 0; i < m.bank.rows(); ++i) {
    out += std::to_string(m.bank_labels.at(static_cast<std::size_t>(i))) + " ";
    detail::put_row(out, m.bank, i);
  }
  const auto& c = m.curve;
  LossBreakdown best = c.best_epoch >= 0 && static_cast<std::size_t>(c.best_epoch) < c.epochs.size()
                           ? c.best()
                           : LossBreakdown{};
  out += "curve " + std::to_string(c.epochs.size()) + " " + std::to_string(c.best_epoch) + " " +
         (c.early_stopped ? "1" : "0") + " " + text::format_double(best.classification) + " " +
         text::format_double(best.walker) + " " + text::format_double(best.visit) + " " +
         text::format_double(best.total) + "\n";
  return out;
}

/// Parses a model file. Only the selected epoch's losses are stored, so the
/// returned curve has the right length and best_epoch but zeroed entries
/// elsewhere.
inline EmbeddingModel parse_model(const std::string& content) {
  detail::Tokens t(content);
  t.expect("gridfault-model");
  if (t.integer() != 1) fail(ErrorKind::Format, "unsupported model file version");
  t.expect("dim");
  const auto d = t.integer();
  t.expect("input_dim");
  const auto D = t.integer();
  t.expect("categories");
  const auto K = t.integer();
  if (d < 1 || D <= d || K != kNumCategories) fail(ErrorKind::Format, "model file: bad dimensions");

  EmbeddingModel m;
  t.expect("hyper");
  m.hyper.dim = static_cast<int>(d);
  m.hyper.lambda_w = t.real();
  m.hyper.lambda_v = t.real();
  m.hyper.learning_rate = t.real();
  m.hyper.max_epochs = static_cast<int>(t.integer());
  m.hyper.patience = static_cast<int>(t.integer());
  m.hyper.seed = std::stoull(t.word());

  auto read_matrix = [&](Matrix& out, Eigen::Index rows, Eigen::Index cols) {
    out.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = t.real();
  };
  t.expect("W");
  read_matrix(m.W, d, D);
  t.expect("head");
  read_matrix(m.head, K, d);
  t.expect("bias");
  m.bias.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) m.bias(k) = t.real();
  t.expect("norm_min");
  m.normalizer.min.resize(static_cast<std::size_t>(D));
  for (auto& v : m.normalizer.min) v = t.real();
  t.expect("norm_max");
  m.normalizer.max.resize(static_cast<std::size_t>(D));
  for (auto& v : m.normalizer.max) v = t.real();

  t.expect("bank");
  const auto n = t.integer();
  if (n < 0) fail(ErrorKind::Format, "model file: negative bank size");
  m.bank.resize(n, d);
  m.bank_labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto y = t.integer();
    if (y < 0 || y >= K) fail(ErrorKind::Format, "model file: bank label out of range");
    m.bank_labels[static_cast<std::size_t>(i)] = static_cast<int>(y);
    for (Eigen::Index c = 0; c < d; ++c) m.bank(i, c) = t.real();
  }

  t.expect("curve");
  const auto run = t.integer();
  const auto best_epoch = t.integer();
  if (run < 0 || best_epoch < -1 || best_epoch >= std::max<long long>(run, 1))
    fail(ErrorKind::Format, "model file: bad curve summary");
  m.curve.early_stopped = t.integer() != 0;
  LossBreakdown best;
  best.classification = t.real();
  best.walker = t.real();
  best.visit = t.real();
  best.total = t.real();
  m.curve.epochs.resize(static_cast<std::size_t>(run));
  m.curve.best_epoch = static_cast<int>(best_epoch);
  if (best_epoch >= 0) m.curve.epochs[static_cast<std::size_t>(best_epoch)] = best;
  if (!m.W.allFinite() || !m.head.allFinite() || !m.bias.allFinite() || !m.bank.allFinite())
    fail(ErrorKind::Format, "model file contains non-finite parameters");
  return m;
}

inline void write_model(const std::filesystem::path& path, const EmbeddingModel& m) {
  text::write_file_atomic(path, serialize_model(m));
}

inline EmbeddingModel read_model(const std::filesystem::path& path) {
  return parse_model(text::read_file(path));
}

}  // namespace gridfault::aplcore
