#pragma once

#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "gridfault/aplcore/predict.hpp"
#include "gridfault/aplcore/trainer.hpp"
#include "gridfault/baselines/knn.hpp"
#include "gridfault/baselines/svm.hpp"
#include "gridfault/core/hash.hpp"
#include "gridfault/evalharness/label_guard.hpp"
#include "gridfault/evalharness/metrics.hpp"
#include "gridfault/evalharness/splits.hpp"
#include "gridfault/wavefeat/feature_io.hpp"

namespace gridfault::evalharness {

inline constexpr const char* kCodeVersion = "gridfault-eval/1";

enum class ModelKind { Apl, Knn, Svm };

inline std::string_view to_string(ModelKind m) {
  switch (m) {
    case ModelKind::Apl: return "apl";
    case ModelKind::Knn: return "knn";
    case ModelKind::Svm: return "svm";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "apl") return ModelKind::Apl;
  if (s == "knn") return ModelKind::Knn;
  if (s == "svm") return ModelKind::Svm;
  fail(ErrorKind::InvalidArgument, "unknown model '" + std::string(s) + "' (expected apl, knn or svm)");
}

struct ExperimentConfig {
  int protocol = 1;
  int repetitions = 10;
  std::uint64_t seed = 42;
  std::vector<ModelKind> models = {ModelKind::Apl, ModelKind::Knn, ModelKind::Svm};

  aplcore::Hyperparams apl;  // dim and lambda_v are overridden by the grids below
  std::vector<double> lambda_v_grid = {0.2, 0.5};
  std::vector<int> dim_grid = {6, 8, 12};
  std::vector<int> protocol2_dims = {6, 8, 12};
  // Protocol 1 only: when > 0, snapshots every this many epochs also compete
  // on validation F1. 0 keeps one lowest-objective model per grid point.
  int checkpoint_every = 0;

  std::vector<int> knn_candidates = {1, 3, 5, 7, 10, 15};
  std::vector<int> svm_degrees = {2, 3};
  double svm_c = 10.0;

  int validation_size = kValidationSize;
  int nominal_target = kNominalTargetSize;
  int threads = 1;  // training jobs run concurrently when > 1; results do not depend on it
};

inline void validate(const ExperimentConfig& c) {
  require(c.protocol == 1 || c.protocol == 2, "protocol must be 1 or 2");
  require(c.repetitions >= 1, "repetitions must be >= 1");
  require(!c.models.empty(), "no models selected");
  require(!c.lambda_v_grid.empty() && !c.dim_grid.empty() && !c.protocol2_dims.empty(),
          "APL grids must be non-empty");
  require(c.checkpoint_every >= 0, "checkpoint interval must be >= 0");
  require(!c.knn_candidates.empty() && !c.svm_degrees.empty(), "baseline grids must be non-empty");
  require(c.svm_c > 0, "SVM C must be positive");
  require(c.threads >= 1, "threads must be >= 1");
  aplcore::validate(c.apl);
}

/// Canonical text form of everything that affects results.
inline std::string describe(const ExperimentConfig& c) {
  auto ints = [](const std::vector<int>& v) {
    std::string s;
    for (int x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
    return s;
  };
  std::string s = "protocol=" + std::to_string(c.protocol) + ";reps=" + std::to_string(c.repetitions) +
                  ";seed=" + std::to_string(c.seed) + ";models=";
  for (auto m : c.models) s += std::string(to_string(m)) + ",";
  s += ";lw=" + text::format_double(c.apl.lambda_w) + ";lr=" + text::format_double(c.apl.learning_rate) +
       ";epochs=" + std::to_string(c.apl.max_epochs) + ";patience=" + std::to_string(c.apl.patience) +
       ";dim=" + std::to_string(c.apl.dim) + ";lv=" + text::format_double(c.apl.lambda_v) + ";lv_grid=";
  for (double v : c.lambda_v_grid) s += text::format_double(v) + ",";
  s += ";dim_grid=" + ints(c.dim_grid) + ";p2_dims=" + ints(c.protocol2_dims) +
       ";every=" + std::to_string(c.checkpoint_every) + ";knn=" + ints(c.knn_candidates) +
       ";svm=" + ints(c.svm_degrees) + ";C=" + text::format_double(c.svm_c) +
       ";split=" + std::to_string(c.validation_size) + "/" + std::to_string(c.nominal_target);
  return s;
}

struct RepetitionResult {
  int repetition = 0;
  std::uint64_t split_seed = 0;
  bool complete = false;
  std::string diagnostic;
  std::string selection;  // chosen hyperparameters, human readable
  int n_test = 0;
  F1Scores f1;
};

struct ModelReport {
  ModelKind model = ModelKind::Apl;
  std::vector<RepetitionResult> repetitions;
};

struct Spread {
  double mean = 0.0, min = 0.0, max = 0.0;
  int count = 0;
};

inline Spread macro_spread(const ModelReport& m) {
  Spread s;
  for (const auto& r : m.repetitions) {
    if (!r.complete) continue;
    if (s.count == 0) s.min = s.max = r.f1.macro;
    s.min = std::min(s.min, r.f1.macro);
    s.max = std::max(s.max, r.f1.macro);
    s.mean += r.f1.macro;
    ++s.count;
  }
  if (s.count) s.mean /= s.count;
  return s;
}

inline std::array<double, kNumCategories> category_means(const ModelReport& m) {
  std::array<double, kNumCategories> out{};
  int n = 0;
  for (const auto& r : m.repetitions) {
    if (!r.complete) continue;
    for (std::size_t k = 0; k < kNumCategories; ++k) out[k] += r.f1.per_category[k];
    ++n;
  }
  if (n)
    for (double& v : out) v /= n;
  return out;
}

struct ExperimentReport {
  int protocol = 1;
  int repetitions = 0;
  std::uint64_t seed = 0;
  std::string fingerprint;
  std::vector<ModelReport> models;
  std::vector<std::string> warnings;
  int refused_label_reads = 0;

  const ModelReport* find(ModelKind k) const {
    for (const auto& m : models)
      if (m.model == k) return &m;
    return nullptr;
  }
};

inline std::string data_fingerprint(const std::vector<wavefeat::FeatureVector>& source,
                                    const std::vector<wavefeat::FeatureVector>& target) {
  return Fnv1a{}.update(wavefeat::serialize_features(source)).update(wavefeat::serialize_features(target)).hex();
}

inline std::string report_fingerprint(const ExperimentConfig& c, const std::string& data_fp) {
  return Fnv1a{}.update(kCodeVersion).update(describe(c)).update(data_fp).hex();
}

namespace detail {

// Predictions of one trained APL configuration over the whole target pool.
struct AplCandidate {
  std::string label;
  int epoch = -1;
  double objective = 0.0;
  std::vector<Category> predictions;
};

struct AplJob {
  double lambda_v = 0.0;
  int dim = 0;
  std::vector<AplCandidate> checkpoints;  // the objective-best model, or every snapshot
  std::string error;
};

inline std::vector<Category> categories_of(const std::vector<aplcore::Prediction>& ps) {
  std::vector<Category> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.push_back(p.category);
  return out;
}

inline std::string apl_label(double lv, int dim, int epoch) {
  return "lambda_v=" + text::format_double(lv) + " d=" + std::to_string(dim) + " epoch=" + std::to_string(epoch);
}

inline void run_apl_job(AplJob& job, const ExperimentConfig& c, const aplcore::Matrix& Xs,
                        const std::vector<int>& ys, const aplcore::Matrix& Xt) {
  aplcore::Hyperparams h = c.apl;
  h.dim = job.dim;
  h.lambda_v = job.lambda_v;
  h.seed = mix_seed(c.seed, 0x61706cULL);
  try {
    if (c.protocol == 1 && c.checkpoint_every > 0) {
      // Training does not depend on the split, so one run per grid point is
      // shared by every repetition; the snapshots are scored per split.
      aplcore::CheckpointSelector capture;
      capture.every = c.checkpoint_every;
      capture.score = [&](int epoch, const aplcore::EmbeddingModel& m) {
        job.checkpoints.push_back({apl_label(h.lambda_v, h.dim, epoch), epoch,
                                   m.curve.epochs.back().total, categories_of(aplcore::predict_rows(m, Xt))});
        return 0.0;
      };
      aplcore::train(Xs, ys, Xt, h, {}, capture);
    } else {
      const auto model = aplcore::train(Xs, ys, Xt, h);
      job.checkpoints.push_back({apl_label(h.lambda_v, h.dim, model.curve.best_epoch), model.curve.best_epoch,
                                 model.curve.best().total, categories_of(aplcore::predict_rows(model, Xt))});
    }
  } catch (const std::exception& e) {
    job.error = e.what();
  }
}

template <class Job, class Fn>
void run_jobs(std::vector<Job>& jobs, int threads, Fn fn) {
  if (threads <= 1) {
    for (auto& j : jobs) fn(j);
    return;
  }
  for (std::size_t begin = 0; begin < jobs.size(); begin += static_cast<std::size_t>(threads)) {
    std::vector<std::future<void>> running;
    for (std::size_t i = begin; i < std::min(jobs.size(), begin + static_cast<std::size_t>(threads)); ++i)
      running.push_back(std::async(std::launch::async, [&, i] { fn(jobs[i]); }));
    for (auto& f : running) f.get();
  }
}

inline std::vector<Category> pick(const std::vector<Category>& all, const std::vector<int>& idx) {
  std::vector<Category> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(all[static_cast<std::size_t>(i)]);
  return out;
}

inline aplcore::Matrix rows_of(const aplcore::Matrix& X, const std::vector<int>& idx) {
  aplcore::Matrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
  return out;
}

inline std::vector<int> indices_of(const std::vector<Category>& cs) {
  std::vector<int> out;
  out.reserve(cs.size());
  for (auto c : cs) out.push_back(index_of(c));
  return out;
}

}  // namespace detail

using ProgressFn = std::function<void(const std::string&)>;

/// Runs one protocol over `repetitions` random validation/test splits of the
/// target set. Inputs are normalized feature vectors; source rows must carry
/// labels, target labels are only read through the guard (validation labels
/// for selection under protocol 1, test labels at scoring).
inline ExperimentReport run_experiment(const ExperimentConfig& config,
                                       const std::vector<wavefeat::FeatureVector>& source,
                                       const std::vector<wavefeat::FeatureVector>& target,
                                       const ProgressFn& progress = {}) {
  validate(config);
  require(!source.empty(), "run_experiment: empty source set");
  require(!target.empty(), "run_experiment: empty target set");
  auto note = [&](const std::string& s) {
    if (progress) progress(s);
  };

  ExperimentReport report;
  report.protocol = config.protocol;
  report.repetitions = config.repetitions;
  report.seed = config.seed;
  report.fingerprint = report_fingerprint(config, data_fingerprint(source, target));

  const aplcore::Matrix Xs = aplcore::to_matrix(source);
  const std::vector<int> ys = aplcore::to_labels(source);
  const aplcore::Matrix Xt = aplcore::to_matrix(target);
  std::vector<Category> hidden;
  hidden.reserve(target.size());
  for (const auto& t : target) {
    require(t.label.has_value(), "run_experiment: target row " + t.record_id + " has no label to score against");
    hidden.push_back(*t.label);
  }
  const int n_target = static_cast<int>(target.size());

  // Split-independent fits, shared by all repetitions.
  std::vector<detail::AplJob> apl_jobs;
  std::vector<Category> svm_predictions;
  std::string svm_selection, svm_error;
  std::optional<int> knn_loo_k;
  std::string knn_error;
  for (ModelKind m : config.models) {
    if (m == ModelKind::Apl) {
      if (config.protocol == 1) {
        for (double lv : config.lambda_v_grid)
          for (int d : config.dim_grid) apl_jobs.push_back({lv, d, {}, {}});
      } else {
        for (int d : config.protocol2_dims) apl_jobs.push_back({config.apl.lambda_v, d, {}, {}});
      }
      note("training APL: " + std::to_string(apl_jobs.size()) + " configurations");
      detail::run_jobs(apl_jobs, config.threads,
                       [&](detail::AplJob& j) { detail::run_apl_job(j, config, Xs, ys, Xt); });
    } else if (m == ModelKind::Svm) {
      try {
        const auto sel = baselines::svm_select_degree(Xs, ys, config.svm_degrees, config.svm_c);
        const auto model = baselines::svm_fit(Xs, ys, sel.degree, config.svm_c);
        svm_predictions = baselines::svm_predict_rows(model, Xt);
        svm_selection = "degree=" + std::to_string(sel.degree);
        note("SVM: " + svm_selection);
      } catch (const std::exception& e) {
        svm_error = e.what();
      }
    } else if (m == ModelKind::Knn && config.protocol == 2) {
      try {
        knn_loo_k = baselines::knn_select_k_loo(Xs, ys, config.knn_candidates);
        note("KNN: leave-one-out K=" + std::to_string(*knn_loo_k));
      } catch (const std::exception& e) {
        knn_error = e.what();
      }
    }
  }

  for (ModelKind m : config.models) report.models.push_back({m, {}});

  for (int rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t split_seed = mix_seed(config.seed, 0x73706c6974ULL + static_cast<std::uint64_t>(rep));
    const SplitSpec split = make_splits(n_target, split_seed, config.validation_size, config.nominal_target);
    if (!split.warning.empty() && rep == 0) report.warnings.push_back(split.warning);

    for (auto& mr : report.models) {
      GuardedLabels labels(hidden);
      if (config.protocol == 1) labels.release(split.validation);
      RepetitionResult r;
      r.repetition = rep;
      r.split_seed = split_seed;
      r.n_test = static_cast<int>(split.test.size());
      try {
        std::vector<Category> test_pred;
        switch (mr.model) {
          case ModelKind::Apl: {
            const detail::AplCandidate* chosen = nullptr;
            double best_key = -std::numeric_limits<double>::infinity();
            for (const auto& job : apl_jobs) {
              if (!job.error.empty()) fail(ErrorKind::Integration, "APL training failed: " + job.error);
              for (const auto& cand : job.checkpoints) {
                // Protocol 1 ranks by validation F1, protocol 2 by the
                // training objective alone. Earlier entries win ties.
                const double key =
                    config.protocol == 1
                        ? f1_scores(detail::pick(cand.predictions, split.validation), labels.gather(split.validation))
                              .macro
                        : -cand.objective;
                if (key > best_key) {
                  best_key = key;
                  chosen = &cand;
                }
              }
            }
            require(chosen != nullptr, "APL produced no checkpoints", ErrorKind::Convergence);
            test_pred = detail::pick(chosen->predictions, split.test);
            r.selection = chosen->label;
            break;
          }
          case ModelKind::Knn: {
            if (!knn_error.empty()) fail(ErrorKind::InvalidArgument, knn_error);
            int k;
            if (config.protocol == 1) {
              const auto yv = detail::indices_of(labels.gather(split.validation));
              k = baselines::knn_select_k(Xs, ys, detail::rows_of(Xt, split.validation), yv, config.knn_candidates);
            } else {
              k = *knn_loo_k;
            }
            const auto model = baselines::knn_fit(Xs, ys, k);
            test_pred = baselines::knn_predict_rows(model, detail::rows_of(Xt, split.test));
            r.selection = "K=" + std::to_string(k);
            break;
          }
          case ModelKind::Svm: {
            if (!svm_error.empty()) fail(ErrorKind::Convergence, svm_error);
            test_pred = detail::pick(svm_predictions, split.test);
            r.selection = svm_selection;
            break;
          }
        }
        labels.release(split.test);
        r.f1 = f1_scores(test_pred, labels.gather(split.test));
        r.complete = true;
      } catch (const Error& e) {
        r.diagnostic = std::string(to_string(e.kind())) + ": " + e.what();
      } catch (const std::exception& e) {
        r.diagnostic = e.what();
      }
      report.refused_label_reads += labels.refused_reads();
      mr.repetitions.push_back(std::move(r));
    }
    note("repetition " + std::to_string(rep + 1) + "/" + std::to_string(config.repetitions) + " done");
  }
  return report;
}

}  // namespace gridfault::evalharness
