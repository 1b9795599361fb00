#pragma once

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gridfault/aplcore/model_io.hpp"
#include "gridfault/aplcore/predict.hpp"
#include "gridfault/aplcore/trainer.hpp"
#include "gridfault/baselines/knn.hpp"
#include "gridfault/baselines/svm.hpp"
#include "gridfault/cli/pipeline.hpp"

namespace gridfault::cli {

// Exit statuses. Every failure also prints one line "error: <class>: <message>".
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInvalidValue = 3;
inline constexpr int kExitMissingInput = 4;

inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return kExitInvalidValue;
    case ErrorKind::MissingInput: return kExitMissingInput;
    default: return kExitFailure;
  }
}

/// Content hash of a dataset directory: the manifest plus every record file
/// it lists, in manifest order.
inline std::string dataset_hash(const std::filesystem::path& dir) {
  Fnv1a h;
  h.update(text::read_file(dir / arcsim::kManifestName));
  for (const auto& e : arcsim::read_manifest(dir).records) h.update(text::read_file(dir / e.file));
  return h.hex();
}

namespace detail {

inline std::vector<wavefeat::FeatureVector> rows_in_domain(const std::vector<wavefeat::FeatureVector>& rows, Domain d,
                                                           const std::string& file) {
  std::vector<wavefeat::FeatureVector> out;
  for (const auto& r : rows)
    if (r.domain == d) out.push_back(r);
  if (out.empty())
    fail(ErrorKind::InvalidArgument, file + " has no " + std::string(to_string(d)) + "-domain rows");
  return out;
}

inline std::string label_text(const wavefeat::FeatureVector& fv) {
  return fv.label ? std::string(to_string(*fv.label)) : std::string();
}

inline void write_predictions(const std::filesystem::path& path, const std::vector<wavefeat::FeatureVector>& rows,
                              const std::vector<Category>& pred,
                              const std::vector<std::array<double, kNumCategories>>* scores = nullptr) {
  std::string out = "record_id,label,prediction";
  if (scores)
    for (auto c : kAllCategories) out += ",score_" + std::string(to_string(c));
  out += "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += rows[i].record_id + "," + label_text(rows[i]) + "," + std::string(to_string(pred[i]));
    if (scores)
      for (double s : (*scores)[i]) out += "," + text::format_double(s);
    out += "\n";
  }
  text::write_file_atomic(path, out);
}

inline std::string accuracy_note(const std::vector<wavefeat::FeatureVector>& rows, const std::vector<Category>& pred) {
  std::vector<Category> truth, p;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].label) {
      truth.push_back(*rows[i].label);
      p.push_back(pred[i]);
    }
  if (truth.empty()) return {};
  const auto f1 = evalharness::f1_scores(p, truth);
  return " (labeled rows: " + std::to_string(truth.size()) + ", macro-F1 " + evalharness::detail::fixed(f1.macro) + ")";
}

inline PipelineConfig load_config(const std::string& path) {
  return path.empty() ? PipelineConfig{} : read_config(path);
}

/// Features for `evaluate --data DIR`: DIR/features.csv if present, else
/// extracted from DIR's dataset, else a dataset is generated into DIR first.
inline std::vector<wavefeat::FeatureVector> evaluation_features(const std::filesystem::path& dir,
                                                                const PipelineConfig& c, std::uint64_t seed,
                                                                std::ostream& log) {
  std::error_code ec;
  if (std::filesystem::exists(dir / kFeaturesName, ec)) return wavefeat::read_features(dir / kFeaturesName);
  if (!std::filesystem::exists(dir / arcsim::kManifestName, ec)) {
    log << "no dataset in " << dir.string() << "; generating one (seed " << seed << ")\n";
    arcsim::generate_dataset(c.simulate, seed, dir);
  }
  auto rows = features_from_dataset(dir, c.resample);
  wavefeat::write_features(dir / kFeaturesName, rows);
  return rows;
}

}  // namespace detail

/// Parses argv, runs the chosen subcommand and returns the exit status.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Early-stage fault identification: arc-fault simulation, wavelet features, association-based "
               "domain adaptation and KNN/SVM baselines."};
  app.name("gridfault");
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Print progress messages to stderr");

  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  std::uint64_t seed_value = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Key = value configuration file (flags override it)");
    sub->add_option("--seed", seed_value, "Global seed (overrides " + std::string(kSeedEnv) + " and config)");
  };
  auto seed_given = [&](CLI::App* sub) { return sub->count("--seed") > 0; };
  LogFn progress = [&](const std::string& s) {
    if (verbose) err << s << "\n";
  };

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a labeled synthetic waveform dataset");
  std::string sim_out, sim_counts, sim_domain;
  sim->add_option("--out", sim_out, "Output dataset directory")->required();
  sim->add_option("--counts", sim_counts, "Records per category as SIF,MIF,PF,TD (for each generated domain)");
  sim->add_option("--domain", sim_domain, "Generate only this domain")->check(CLI::IsMember({"source", "shifted"}));
  add_common(sim);

  // extract
  auto* ext = app.add_subcommand("extract", "Compute the 54-value feature vector of every record");
  std::string ext_in, ext_out;
  double ext_resample = 0.0;
  ext->add_option("--in", ext_in, "Dataset directory")->required();
  ext->add_option("--out", ext_out, "Feature file (CSV)")->required();
  ext->add_option("--resample", ext_resample, "Analysis sampling rate in Hz (default 4000)")->check(CLI::PositiveNumber);
  add_common(ext);

  // train
  auto* trn = app.add_subcommand("train", "Train the association-based embedding model");
  std::string trn_source, trn_target, trn_out;
  int trn_dim = 0, trn_epochs = 0, trn_patience = 0;
  double trn_lw = 0, trn_lv = 0, trn_lr = 0;
  trn->add_option("--source", trn_source, "Feature file with labeled source-domain rows")->required();
  trn->add_option("--target", trn_target, "Feature file with shifted-domain rows (labels ignored)")->required();
  trn->add_option("--out", trn_out, "Model file to write")->required();
  trn->add_option("--dim", trn_dim, "Embedding dimension (default 8)")->check(CLI::PositiveNumber);
  trn->add_option("--lw", trn_lw, "Walker loss weight (default 1.0)")->check(CLI::NonNegativeNumber);
  trn->add_option("--lv", trn_lv, "Visit loss weight (default 0.5)")->check(CLI::NonNegativeNumber);
  trn->add_option("--lr", trn_lr, "Learning rate (default 0.01)")->check(CLI::PositiveNumber);
  trn->add_option("--epochs", trn_epochs, "Maximum epochs (default 2000)")->check(CLI::PositiveNumber);
  trn->add_option("--patience", trn_patience, "Early-stop patience in epochs (default 200)")->check(CLI::PositiveNumber);
  add_common(trn);

  // predict
  auto* prd = app.add_subcommand("predict", "Classify feature rows with a trained model");
  std::string prd_model, prd_features, prd_out;
  prd->add_option("--model", prd_model, "Model file")->required();
  prd->add_option("--features", prd_features, "Feature file (raw, as written by extract)")->required();
  prd->add_option("--out", prd_out, "Predictions file (CSV)")->required();

  // baseline
  auto* bsl = app.add_subcommand("baseline", "Fit and apply a KNN or SVM baseline");
  std::string bsl_algo, bsl_train, bsl_test, bsl_valid, bsl_select = "train-loo", bsl_out;
  int bsl_k = 0, bsl_degree = 0;
  double bsl_c = 0.0;
  bsl->add_option("--algo", bsl_algo, "Classifier")->required()->check(CLI::IsMember({"knn", "svm"}));
  bsl->add_option("--train", bsl_train, "Labeled training feature file")->required();
  bsl->add_option("--test", bsl_test, "Feature file to classify")->required();
  bsl->add_option("--select-on", bsl_select, "KNN K selection: validation set or leave-one-out on training set")
      ->check(CLI::IsMember({"validation", "train-loo"}));
  bsl->add_option("--validation", bsl_valid, "Labeled validation feature file (with --select-on validation)");
  bsl->add_option("--k", bsl_k, "Fixed K, skipping selection")->check(CLI::PositiveNumber);
  bsl->add_option("--degree", bsl_degree, "Fixed polynomial degree, skipping selection")->check(CLI::PositiveNumber);
  bsl->add_option("--C", bsl_c, "SVM regularization (default 10)")->check(CLI::PositiveNumber);
  bsl->add_option("--out", bsl_out, "Predictions file (CSV)")->required();
  add_common(bsl);

  // evaluate
  auto* evl = app.add_subcommand("evaluate", "Run an experiment protocol and write a report");
  int evl_protocol = 1, evl_reps = 0, evl_threads = 0;
  std::string evl_data, evl_out, evl_models;
  evl->add_option("--protocol", evl_protocol, "1: validation labels available; 2: withheld")
      ->check(CLI::IsMember({1, 2}));
  evl->add_option("--reps", evl_reps, "Repetitions (default 10)")->check(CLI::PositiveNumber);
  evl->add_option("--data", evl_data, "Dataset directory (generated if empty)")->required();
  evl->add_option("--out", evl_out, "Report directory")->required();
  evl->add_option("--models", evl_models, "Comma-separated subset of apl,knn,svm");
  evl->add_option("--threads", evl_threads, "Concurrent training jobs (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  add_common(evl);

  // report
  auto* rep = app.add_subcommand("report", "Render a report directory");
  std::string rep_in, rep_format;
  rep->add_option("--in", rep_in, "Report directory")->required();
  rep->add_option("--format", rep_format, "table, csv or scatter (default table)")
      ->check(CLI::IsMember({"table", "csv", "scatter"}));

  // pipeline
  auto* pip = app.add_subcommand("pipeline", "simulate, extract and evaluate with stage caching");
  pip->add_option("--config", config_path, "Key = value configuration file")->required();
  pip->add_option("--seed", seed_value, "Global seed (overrides " + std::string(kSeedEnv) + " and config)");
  bool pip_print_config = false;
  pip->add_flag("--print-config", pip_print_config, "Print the effective configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ConversionError& e) {
    err << "error: invalid_argument: " << e.what() << "\n";
    return kExitInvalidValue;
  } catch (const CLI::ValidationError& e) {
    err << "error: invalid_argument: " << e.what() << "\n";
    return kExitInvalidValue;
  } catch (const CLI::ParseError& e) {
    err << "error: usage_error: " << e.what() << "\n" << "run 'gridfault --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (sim->parsed()) {
      PipelineConfig c = detail::load_config(config_path);
      if (seed_given(sim)) seed_flag = seed_value;
      const std::uint64_t seed = resolve_seed(seed_flag, c);
      if (!sim_domain.empty()) set_key(c, "simulate.domains", sim_domain);
      if (!sim_counts.empty()) {
        const auto counts = cli::detail::parse_counts(sim_counts);
        if (c.simulate.source.enabled) c.simulate.source.counts = counts;
        if (c.simulate.shifted.enabled) c.simulate.shifted.counts = counts;
      }
      validate(c);
      const auto m = arcsim::generate_dataset(c.simulate, seed, sim_out);
      out << "dataset " << sim_out << ": " << m.records.size() << " records, seed " << seed << ", hash "
          << dataset_hash(sim_out) << "\n";
    } else if (ext->parsed()) {
      const PipelineConfig c = detail::load_config(config_path);
      const double fs = ext->count("--resample") ? ext_resample : c.resample;
      const auto rows = features_from_dataset(ext_in, fs);
      wavefeat::write_features(ext_out, rows);
      out << ext_out << ": " << rows.size() << " feature rows\n";
    } else if (trn->parsed()) {
      PipelineConfig c = detail::load_config(config_path);
      if (seed_given(trn)) seed_flag = seed_value;
      aplcore::Hyperparams h = c.train;
      if (trn->count("--dim")) h.dim = trn_dim;
      if (trn->count("--lw")) h.lambda_w = trn_lw;
      if (trn->count("--lv")) h.lambda_v = trn_lv;
      if (trn->count("--lr")) h.learning_rate = trn_lr;
      if (trn->count("--epochs")) h.max_epochs = trn_epochs;
      if (trn->count("--patience")) h.patience = trn_patience;
      h.seed = resolve_seed(seed_flag, c);
      auto source = detail::rows_in_domain(wavefeat::read_features(trn_source), Domain::Source, trn_source);
      auto target = detail::rows_in_domain(wavefeat::read_features(trn_target), Domain::Shifted, trn_target);
      std::vector<wavefeat::FeatureVector> all = source;
      all.insert(all.end(), target.begin(), target.end());
      const auto norm = wavefeat::fit_normalizer(all);
      const auto Xs = aplcore::to_matrix(wavefeat::apply_normalizer(norm, source));
      const auto Xt = aplcore::to_matrix(wavefeat::apply_normalizer(norm, target));
      auto model = aplcore::train(Xs, aplcore::to_labels(source), Xt, h, [&](int epoch, const aplcore::LossBreakdown& l) {
        if (verbose && epoch % 100 == 0)
          err << "epoch " << epoch << " L=" << l.total << " (L_s " << l.classification << ", L_w " << l.walker
              << ", L_v " << l.visit << ")\n";
      });
      model.normalizer = norm;
      aplcore::write_model(trn_out, model);
      const auto& b = model.curve.best();
      out << trn_out << ": d=" << h.dim << ", " << model.curve.epochs.size() << " epochs, best epoch "
          << model.curve.best_epoch << ", L=" << text::format_double(b.total) << " (L_s "
          << text::format_double(b.classification) << ", L_w " << text::format_double(b.walker) << ", L_v "
          << text::format_double(b.visit) << ")\n";
    } else if (prd->parsed()) {
      const auto model = aplcore::read_model(prd_model);
      const auto rows = wavefeat::read_features(prd_features);
      require(model.normalizer.dim() == static_cast<std::size_t>(model.input_dim()),
              "model normalizer does not match its input dimension", ErrorKind::Format);
      const auto X = aplcore::to_matrix(wavefeat::apply_normalizer(model.normalizer, rows));
      std::vector<Category> pred;
      std::vector<std::array<double, kNumCategories>> scores;
      for (const auto& p : aplcore::predict_rows(model, X)) {
        pred.push_back(p.category);
        scores.push_back(p.scores);
      }
      detail::write_predictions(prd_out, rows, pred, &scores);
      out << prd_out << ": " << rows.size() << " predictions" << detail::accuracy_note(rows, pred) << "\n";
    } else if (bsl->parsed()) {
      const PipelineConfig c = detail::load_config(config_path);
      const auto train_rows = wavefeat::read_features(bsl_train);
      const auto test_rows = wavefeat::read_features(bsl_test);
      const bool use_validation = bsl_select == "validation";
      if (use_validation && bsl_valid.empty())
        fail(ErrorKind::InvalidArgument, "--select-on validation needs --validation FILE");
      const auto valid_rows = use_validation ? wavefeat::read_features(bsl_valid) : std::vector<wavefeat::FeatureVector>{};
      std::vector<wavefeat::FeatureVector> all = train_rows;
      all.insert(all.end(), test_rows.begin(), test_rows.end());
      all.insert(all.end(), valid_rows.begin(), valid_rows.end());
      const auto norm = wavefeat::fit_normalizer(all);
      const auto Xtr = aplcore::to_matrix(wavefeat::apply_normalizer(norm, train_rows));
      const auto ytr = aplcore::to_labels(train_rows);
      const auto Xte = aplcore::to_matrix(wavefeat::apply_normalizer(norm, test_rows));
      std::vector<Category> pred;
      std::string chosen;
      if (bsl_algo == "knn") {
        int k = bsl_k;
        if (!bsl->count("--k")) {
          const auto& ks = c.evaluate.knn_candidates;
          k = use_validation ? baselines::knn_select_k(Xtr, ytr, aplcore::to_matrix(wavefeat::apply_normalizer(norm, valid_rows)),
                                                       aplcore::to_labels(valid_rows), ks)
                             : baselines::knn_select_k_loo(Xtr, ytr, ks);
        }
        pred = baselines::knn_predict_rows(baselines::knn_fit(Xtr, ytr, k), Xte);
        chosen = "K=" + std::to_string(k);
      } else {
        const double C = bsl->count("--C") ? bsl_c : c.evaluate.svm_c;
        int degree = bsl_degree;
        if (!bsl->count("--degree")) degree = baselines::svm_select_degree(Xtr, ytr, c.evaluate.svm_degrees, C).degree;
        pred = baselines::svm_predict_rows(baselines::svm_fit(Xtr, ytr, degree, C), Xte);
        chosen = "degree=" + std::to_string(degree);
      }
      detail::write_predictions(bsl_out, test_rows, pred);
      out << bsl_out << ": " << bsl_algo << " " << chosen << ", " << test_rows.size() << " predictions"
          << detail::accuracy_note(test_rows, pred) << "\n";
    } else if (evl->parsed()) {
      PipelineConfig c = detail::load_config(config_path);
      if (seed_given(evl)) seed_flag = seed_value;
      const std::uint64_t seed = resolve_seed(seed_flag, c);
      if (evl->count("--reps")) c.evaluate.repetitions = evl_reps;
      if (evl->count("--threads")) c.evaluate.threads = evl_threads;
      if (!evl_models.empty()) set_key(c, "evaluate.models", evl_models);
      validate(c);
      const auto e = experiment_config(c, evl_protocol, seed);
      const auto inputs = prepare_inputs(detail::evaluation_features(evl_data, c, seed, err));
      const auto report = evalharness::run_experiment(e, inputs.source, inputs.target, progress);
      evalharness::emit_report(report, evl_out);
      out << evalharness::render_table(report);
    } else if (rep->parsed()) {
      const auto r = evalharness::read_report(rep_in);
      const std::string fmt = rep_format.empty() ? "table" : rep_format;
      if (fmt == "table") out << evalharness::render_table(r);
      else if (fmt == "csv") out << evalharness::render_summary_csv(r);
      else out << evalharness::render_scatter_csv(r);
    } else if (pip->parsed()) {
      const PipelineConfig c = read_config(config_path);
      if (seed_given(pip)) seed_flag = seed_value;
      const std::uint64_t seed = resolve_seed(seed_flag, c);
      if (pip_print_config) {
        PipelineConfig shown = c;
        shown.seed = seed;
        out << to_config_text(shown);
        return kExitOk;
      }
      const auto result = run_pipeline(c, seed, progress);
      for (const auto& s : result.stages)
        out << s.stage << ": " << (s.cached ? "cached" : "ran") << " " << s.key << " " << s.output.string() << "\n";
      for (const auto& r : result.reports) {
        out << "\n";
        if (c.report_format == "table") out << evalharness::render_table(r);
        else if (c.report_format == "csv") out << evalharness::render_summary_csv(r);
        else out << evalharness::render_scatter_csv(r);
      }
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: internal_error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace gridfault::cli
