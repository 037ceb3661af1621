#include "orars/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "orars/folds.hpp"
#include "orars/metrics.hpp"
#include "orars/normalize.hpp"
#include "orars/parallel.hpp"
#include "orars/scoring.hpp"

namespace orars {

std::string method_name(Method m) {
  switch (m) {
    case Method::grnn: return "grnn";
    case Method::sorars: return "sorars";
    case Method::orars: return "orars";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "grnn") return Method::grnn;
  if (s == "sorars") return Method::sorars;
  if (s == "orars") return Method::orars;
  throw InvalidConfig("unknown method '" + s + "' (expected grnn|sorars|orars)");
}

std::string to_string(GridMode m) {
  switch (m) {
    case GridMode::none: return "none";
    case GridMode::full: return "full";
    case GridMode::restricted: return "restricted";
    case GridMode::automatic: return "auto";
  }
  return "?";
}

GridMode grid_mode_from_string(const std::string& s) {
  if (s == "none") return GridMode::none;
  if (s == "full") return GridMode::full;
  if (s == "restricted") return GridMode::restricted;
  if (s == "auto") return GridMode::automatic;
  throw InvalidConfig("unknown grid mode '" + s + "' (expected none|full|restricted|auto)");
}

void ExperimentConfig::validate() const {
  if (k < 2) {
    throw InvalidConfig("ExperimentConfig: k must be at least 2");
  }
  if (jobs < 1) {
    throw InvalidConfig("ExperimentConfig: jobs must be positive");
  }
  if (grnn_hidden < 1 || clf_hidden < 1) {
    throw InvalidConfig("ExperimentConfig: hidden units must be positive");
  }
  if (grnn_batch < 1 || clf_batch < 0) {
    throw InvalidConfig("ExperimentConfig: bad batch size");
  }
  if (grnn_epochs < 1 || clf_epochs < 1) {
    throw InvalidConfig("ExperimentConfig: epochs must be positive");
  }
  if (!(grnn_lr > 0.0) || !(clf_lr > 0.0)) {
    throw InvalidConfig("ExperimentConfig: learning rates must be positive");
  }
  if (grnn_dropout < 0.0 || grnn_dropout >= 1.0 || clf_dropout < 0.0 || clf_dropout >= 1.0) {
    throw InvalidConfig("ExperimentConfig: dropout must be in [0, 1)");
  }
}

std::map<std::string, std::string> ExperimentConfig::echo() const {
  return {
      {"k", std::to_string(k)},
      {"seed", std::to_string(seed)},
      {"jobs", std::to_string(jobs)},
      {"grid", to_string(grid)},
      {"grnn_hidden", std::to_string(grnn_hidden)},
      {"grnn_dropout", format_double(grnn_dropout)},
      {"grnn_lr", format_double(grnn_lr)},
      {"grnn_batch", std::to_string(grnn_batch)},
      {"grnn_epochs", std::to_string(grnn_epochs)},
      {"clf_hidden", std::to_string(clf_hidden)},
      {"clf_dropout", format_double(clf_dropout)},
      {"clf_lr", format_double(clf_lr)},
      {"clf_batch", std::to_string(clf_batch)},
      {"clf_epochs", std::to_string(clf_epochs)},
  };
}

const std::vector<std::string>& ExperimentConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "k",         "seed",         "jobs",        "grid",       "grnn_hidden",
      "grnn_dropout", "grnn_lr",   "grnn_batch",  "grnn_epochs", "clf_hidden",
      "clf_dropout",  "clf_lr",    "clf_batch",   "clf_epochs",
  };
  return keys;
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.k = static_cast<int>(kv.get_int("k", c.k));
  c.seed = kv.get_u64("seed", c.seed);
  c.jobs = static_cast<int>(kv.get_int("jobs", c.jobs));
  c.grid = grid_mode_from_string(kv.get_string("grid", to_string(c.grid)));
  c.grnn_hidden = kv.get_int("grnn_hidden", c.grnn_hidden);
  c.grnn_dropout = kv.get_double("grnn_dropout", c.grnn_dropout);
  c.grnn_lr = kv.get_double("grnn_lr", c.grnn_lr);
  c.grnn_batch = static_cast<int>(kv.get_int("grnn_batch", c.grnn_batch));
  c.grnn_epochs = static_cast<int>(kv.get_int("grnn_epochs", c.grnn_epochs));
  c.clf_hidden = kv.get_int("clf_hidden", c.clf_hidden);
  c.clf_dropout = kv.get_double("clf_dropout", c.clf_dropout);
  c.clf_lr = kv.get_double("clf_lr", c.clf_lr);
  c.clf_batch = static_cast<int>(kv.get_int("clf_batch", c.clf_batch));
  c.clf_epochs = static_cast<int>(kv.get_int("clf_epochs", c.clf_epochs));
  c.validate();
  return c;
}

namespace {

struct FoldOutcome {
  bool attempted = false;
  bool ok = false;
  std::string error;
  double fold_mae = 0.0;
  double fold_mse = 0.0;
  Index test_size = 0;
  std::map<std::string, std::string> chosen;  // fold-level hyperparameter choices
};

struct MethodPlan {
  bool want_grnn = false;
  bool want_sorars = false;
  bool want_orars = false;
};

void log_line(const std::string& msg) { std::cerr << "[orars][info] " << msg << "\n"; }

MlpConfig fixed_grnn_config(const ExperimentConfig& config, Index input_dim) {
  MlpConfig m;
  m.input_dim = input_dim;
  m.hidden_units = config.grnn_hidden;
  m.dropout_rate = config.grnn_dropout;
  m.learning_rate = config.grnn_lr;
  m.output = OutputHead::regression;
  return m;
}

MlpConfig fixed_clf_config(const ExperimentConfig& config, Index input_dim) {
  MlpConfig m;
  m.input_dim = input_dim;
  m.hidden_units = config.clf_hidden;
  m.dropout_rate = config.clf_dropout;
  m.learning_rate = config.clf_lr;
  m.output = OutputHead::probability;
  return m;
}

std::vector<MlpConfig> grid_candidates(GridMode mode, Index input_dim, OutputHead output,
                                       Index dataset_size) {
  switch (mode) {
    case GridMode::full: return full_grid(input_dim, output);
    case GridMode::restricted: return restricted_grid(input_dim, output);
    case GridMode::automatic:
      if (output == OutputHead::probability) {
        return classifier_grid(input_dim, dataset_size);
      }
      return full_grid(input_dim, output);
    case GridMode::none: break;
  }
  throw ContractViolation("grid_candidates: called with GridMode::none");
}

void note_config(std::map<std::string, std::string>& chosen, const std::string& prefix,
                 const MlpConfig& m) {
  chosen[prefix + "_hidden"] = std::to_string(m.hidden_units);
  chosen[prefix + "_dropout"] = format_double(m.dropout_rate);
  chosen[prefix + "_lr"] = format_double(m.learning_rate);
}

/// Everything the three methods need for one fold.
struct FoldWork {
  const Dataset& dataset;
  const ExperimentConfig& config;
  const FoldPlan::Fold& fold;
  int fold_index;
  std::uint64_t fold_seed;
  const RunHooks& hooks;

  Dataset normalized;
  Matrix test_features;
  Vector test_labels;

  FoldWork(const Dataset& ds, const ExperimentConfig& cfg, const FoldPlan::Fold& f, int fi,
           std::uint64_t fs, const RunHooks& h)
      : dataset(ds),
        config(cfg),
        fold(f),
        fold_index(fi),
        fold_seed(fs),
        hooks(h),
        normalized(apply_normalization(ds, compute_norm_stats(ds, f.train))),
        test_features(gather_rows(normalized.features(), f.test)),
        test_labels(gather(ds.labels(), f.test)) {}

  TrainResult train_grnn_model(std::map<std::string, std::string>& chosen) const {
    const Matrix train_x = gather_rows(normalized.features(), fold.train);
    const Vector train_y = gather(dataset.labels(), fold.train);
    const Matrix dev_x = gather_rows(normalized.features(), fold.dev);
    const Vector dev_y = gather(dataset.labels(), fold.dev);
    TrainConfig tc{config.grnn_batch, config.grnn_epochs, Rng(fold_seed).child(1).seed()};

    if (config.grid == GridMode::none) {
      const MlpConfig m = fixed_grnn_config(config, dataset.feature_dim());
      note_config(chosen, "grnn", m);
      return train_regressor(train_x, train_y, dev_x, dev_y, m, tc);
    }
    const auto candidates =
        grid_candidates(config.grid, dataset.feature_dim(), OutputHead::regression,
                        dataset.size());
    GridSearchResult res = grid_search(
        candidates,
        [&](const MlpConfig& m, std::uint64_t s) {
          TrainConfig c = tc;
          c.seed = s;
          return train_regressor(train_x, train_y, dev_x, dev_y, m, c);
        },
        Rng(fold_seed).child(3).seed());
    note_config(chosen, "grnn", res.best_config);
    return std::move(res.best_result);
  }

  TrainResult train_classifier_model(double range, std::map<std::string, std::string>& chosen) const {
    const PairSet train_pairs(normalized, fold.train, range, dataset.name() + "/train");
    const CrossPairSet dev_pairs(normalized, fold.dev, fold.train, range,
                                 dataset.name() + "/dev");
    log_line("fold=" + std::to_string(fold_index) +
             " train_pairs=" + std::to_string(train_pairs.size()) +
             " dev_pairs=" + std::to_string(dev_pairs.size()));

    const int batch = config.clf_batch > 0
                          ? config.clf_batch
                          : TrainConfig::classifier_defaults(dataset.size(), 0).batch_size;
    TrainConfig tc{batch, config.clf_epochs, Rng(fold_seed).child(2).seed()};

    if (config.grid == GridMode::none) {
      const MlpConfig m = fixed_clf_config(config, 2 * dataset.feature_dim());
      note_config(chosen, "clf", m);
      return train_binary_classifier(train_pairs, normalized, dev_pairs, m, tc);
    }
    const auto candidates = grid_candidates(config.grid, 2 * dataset.feature_dim(),
                                            OutputHead::probability, dataset.size());
    GridSearchResult res = grid_search(
        candidates,
        [&](const MlpConfig& m, std::uint64_t s) {
          TrainConfig c = tc;
          c.seed = s;
          return train_binary_classifier(train_pairs, normalized, dev_pairs, m, c);
        },
        Rng(fold_seed).child(4).seed());
    note_config(chosen, "clf", res.best_config);
    return std::move(res.best_result);
  }
};

void record_metrics(FoldOutcome& out, const Vector& predictions, const Vector& truths) {
  out.fold_mae = mae(predictions, truths);
  out.fold_mse = mse(predictions, truths);
  out.test_size = truths.size();
  out.ok = true;
}

void run_one_fold(FoldWork& work, const MethodPlan& plan, FoldOutcome* grnn_out,
                  FoldOutcome* sorars_out, FoldOutcome* orars_out) {
  const auto started = std::chrono::steady_clock::now();

  if (plan.want_grnn || plan.want_sorars) {
    std::map<std::string, std::string> chosen;
    bool have_regressor = false;
    RegressorFn regressor;
    try {
      if (work.hooks.regressor_override) {
        const Dataset anchors = work.normalized.subset("anchors", work.fold.train);
        regressor = work.hooks.regressor_override(work.fold_index, anchors);
        have_regressor = true;
      } else {
        TrainResult trained = work.train_grnn_model(chosen);
        if (plan.want_grnn) {
          grnn_out->attempted = true;
          grnn_out->chosen = chosen;
          const Vector preds =
              forward_batch(trained.model, work.test_features, RunMode::inference);
          record_metrics(*grnn_out, preds, work.test_labels);
        }
        regressor = regressor_fn(trained.model);
        have_regressor = true;
      }
    } catch (const Error& e) {
      if (plan.want_grnn) {
        grnn_out->attempted = true;
        grnn_out->error = e.what();
      }
      if (plan.want_sorars) {
        sorars_out->attempted = true;
        sorars_out->error = std::string("regressor unavailable: ") + e.what();
      }
    }

    if (plan.want_sorars && have_regressor) {
      sorars_out->attempted = true;
      sorars_out->chosen = chosen;
      try {
        const Dataset anchors = work.normalized.subset("anchors", work.fold.train);
        const SorarsScorer scorer(regressor, anchors);
        const Vector preds = scorer.predict_batch(work.test_features);
        record_metrics(*sorars_out, preds, work.test_labels);
      } catch (const Error& e) {
        sorars_out->error = e.what();
      }
    }
  }

  if (plan.want_orars) {
    orars_out->attempted = true;
    try {
      std::vector<Index> trainval = work.fold.train;
      trainval.insert(trainval.end(), work.fold.dev.begin(), work.fold.dev.end());
      const double range = label_range(gather(work.dataset.labels(), trainval));
      orars_out->chosen["range"] = format_double(range);

      TrainResult trained = work.train_classifier_model(range, orars_out->chosen);

      const Dataset anchors = work.normalized.subset("anchors", work.fold.train);
      const AnchorScores anchor_scores(anchors.labels());
      Vector preds(work.test_features.rows());
      for (Index t = 0; t < work.test_features.rows(); ++t) {
        const PosteriorVector p =
            posteriors(trained.model, work.test_features.row(t).transpose(), anchors);
        preds[t] = score_with_preference(p, anchor_scores);
      }
      record_metrics(*orars_out, preds, work.test_labels);
    } catch (const Error& e) {
      orars_out->error = e.what();
    }
  }

  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                            started);
  log_line("fold=" + std::to_string(work.fold_index) + " wall_ms=" +
           std::to_string(elapsed.count()));
}

MetricsReport assemble_report(Method method, const ExperimentConfig& config,
                              const std::vector<FoldOutcome>& outcomes) {
  MetricsReport report;
  report.model_id = method_name(method);
  report.hyperparameters = config.echo();
  for (std::size_t f = 0; f < outcomes.size(); ++f) {
    const FoldOutcome& o = outcomes[f];
    if (!o.attempted) {
      continue;
    }
    if (o.ok) {
      report.fold_indices.push_back(static_cast<int>(f));
      report.fold_mae.push_back(o.fold_mae);
      report.fold_mse.push_back(o.fold_mse);
      report.fold_test_sizes.push_back(o.test_size);
      for (const auto& [key, value] : o.chosen) {
        report.hyperparameters["fold" + std::to_string(f) + "." + key] = value;
      }
    } else {
      report.skipped_folds.push_back(static_cast<int>(f));
      report.skip_reasons.push_back(o.error);
      log_line(report.model_id + " fold=" + std::to_string(f) + " skipped: " + o.error);
    }
  }
  report.finalize();
  return report;
}

std::vector<std::vector<FoldOutcome>> run_folds(const Dataset& dataset,
                                                const ExperimentConfig& config,
                                                const FoldPlan& folds,
                                                const std::vector<Method>& methods,
                                                const RunHooks& hooks) {
  MethodPlan plan;
  for (Method m : methods) {
    plan.want_grnn |= (m == Method::grnn);
    plan.want_sorars |= (m == Method::sorars);
    plan.want_orars |= (m == Method::orars);
  }

  std::vector<std::vector<FoldOutcome>> outcomes(3);
  for (auto& v : outcomes) {
    v.resize(folds.folds.size());
  }

  const Rng root(config.seed);
  parallel_for(folds.folds.size(), config.jobs, [&](std::size_t f) {
    FoldWork work(dataset, config, folds.folds[f], static_cast<int>(f),
                  root.child(1000 + f).seed(), hooks);
    run_one_fold(work, plan, &outcomes[0][f], &outcomes[1][f], &outcomes[2][f]);
  });
  return outcomes;
}

std::vector<FoldOutcome> run_single_method(const Dataset& dataset, const ExperimentConfig& config,
                                           Method method, const RunHooks& hooks) {
  config.validate();
  const FoldPlan folds = split_folds(dataset, config.k, config.seed);
  auto outcomes = run_folds(dataset, config, folds, {method}, hooks);
  return std::move(outcomes[static_cast<std::size_t>(method)]);
}

}  // namespace

MetricsReport run_grnn(const Dataset& dataset, const ExperimentConfig& config) {
  return assemble_report(Method::grnn, config,
                         run_single_method(dataset, config, Method::grnn, {}));
}

MetricsReport run_sorars(const Dataset& dataset, const ExperimentConfig& config,
                         const RunHooks& hooks) {
  return assemble_report(Method::sorars, config,
                         run_single_method(dataset, config, Method::sorars, hooks));
}

MetricsReport run_orars(const Dataset& dataset, const ExperimentConfig& config) {
  return assemble_report(Method::orars, config,
                         run_single_method(dataset, config, Method::orars, {}));
}

ComparisonReport compare(const Dataset& dataset, const ExperimentConfig& config,
                         const std::vector<Method>& methods, const RunHooks& hooks) {
  config.validate();
  if (methods.empty()) {
    throw InvalidConfig("compare: no methods requested");
  }

  ComparisonReport report;
  report.dataset_name = dataset.name();
  report.size = dataset.size();
  report.min_label = dataset.labels().minCoeff();
  report.max_label = dataset.labels().maxCoeff();
  report.attributes = dataset.feature_dim();
  report.seed = config.seed;
  report.methods = methods;
  report.folds = split_folds(dataset, config.k, config.seed);

  const auto outcomes = run_folds(dataset, config, report.folds, methods, hooks);
  for (Method m : methods) {
    report.reports.push_back(
        assemble_report(m, config, outcomes[static_cast<std::size_t>(m)]));
  }

  for (std::size_t f = 0; f < report.folds.folds.size(); ++f) {
    std::string winner = "-";
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const auto& outcome = outcomes[static_cast<std::size_t>(methods[mi])][f];
      if (outcome.ok && outcome.fold_mae < best) {
        best = outcome.fold_mae;
        winner = method_name(methods[mi]);
      }
    }
    report.fold_winners.push_back(winner);
  }
  return report;
}

namespace {

// 6 significant digits for the human-readable table; the CSV/JSON artifacts
// carry full precision.
std::string display(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) {
    s.resize(width, ' ');
  } else {
    s += ' ';
  }
  return s;
}

}  // namespace

std::string comparison_table_text(const ComparisonReport& report) {
  std::ostringstream out;
  out << "dataset: " << report.dataset_name << "  size: " << report.size
      << "  min: " << display(report.min_label) << "  max: " << display(report.max_label)
      << "  attributes: " << report.attributes << "  seed: " << report.seed << "\n\n";

  out << pad("method", 8) << pad("mean_mae", 14) << pad("mean_mse", 14)
      << pad("pooled_mae", 14) << "folds\n";
  for (std::size_t mi = 0; mi < report.methods.size(); ++mi) {
    const MetricsReport& r = report.reports[mi];
    out << pad(method_name(report.methods[mi]), 8) << pad(display(r.mean_mae), 14)
        << pad(display(r.mean_mse), 14) << pad(display(r.pooled_mae), 14) << r.fold_mae.size()
        << "/" << report.folds.folds.size() << "\n";
  }

  out << "\nper-fold MAE:\n";
  out << pad("fold", 6) << pad("winner", 8);
  for (Method m : report.methods) {
    out << pad(method_name(m), 14);
  }
  out << "\n";
  for (std::size_t f = 0; f < report.folds.folds.size(); ++f) {
    out << pad(std::to_string(f), 6) << pad(report.fold_winners[f], 8);
    for (std::size_t mi = 0; mi < report.methods.size(); ++mi) {
      const MetricsReport& r = report.reports[mi];
      std::string cell = "-";
      for (std::size_t e = 0; e < r.fold_indices.size(); ++e) {
        if (r.fold_indices[e] == static_cast<int>(f)) {
          cell = display(r.fold_mae[e]);
          break;
        }
      }
      out << pad(cell, 14);
    }
    out << "\n";
  }
  return out.str();
}

void write_comparison_outputs(const ComparisonReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  write_text_file((fs::path(out_dir) / "comparison.txt").string(),
                  comparison_table_text(report));

  // Table-style row: dataset metadata then one mean-MAE column per method.
  {
    std::ostringstream csv;
    csv << "name,size,min,max,attributes";
    for (Method m : report.methods) {
      csv << "," << method_name(m) << "_mae";
    }
    csv << "\n";
    csv << report.dataset_name << "," << report.size << "," << format_double(report.min_label)
        << "," << format_double(report.max_label) << "," << report.attributes;
    for (const MetricsReport& r : report.reports) {
      csv << "," << format_double(r.mean_mae);
    }
    csv << "\n";
    write_text_file((fs::path(out_dir) / "comparison.csv").string(), csv.str());
  }

  {
    std::ostringstream csv;
    csv << "method,fold,mae,mse,test_size\n";
    for (std::size_t mi = 0; mi < report.methods.size(); ++mi) {
      const MetricsReport& r = report.reports[mi];
      for (std::size_t e = 0; e < r.fold_indices.size(); ++e) {
        csv << method_name(report.methods[mi]) << "," << r.fold_indices[e] << ","
            << format_double(r.fold_mae[e]) << "," << format_double(r.fold_mse[e]) << ","
            << r.fold_test_sizes[e] << "\n";
      }
    }
    write_text_file((fs::path(out_dir) / "per_fold.csv").string(), csv.str());
  }

  {
    nlohmann::json j;
    j["dataset"] = {{"name", report.dataset_name}, {"size", report.size},
                    {"min", report.min_label},    {"max", report.max_label},
                    {"attributes", report.attributes}};
    j["seed"] = report.seed;
    j["fold_winners"] = report.fold_winners;
    nlohmann::json methods = nlohmann::json::array();
    for (std::size_t mi = 0; mi < report.methods.size(); ++mi) {
      const MetricsReport& r = report.reports[mi];
      nlohmann::json m;
      m["method"] = method_name(report.methods[mi]);
      m["mean_mae"] = r.mean_mae;
      m["mean_mse"] = r.mean_mse;
      m["pooled_mae"] = r.pooled_mae;
      m["pooled_mse"] = r.pooled_mse;
      m["fold_indices"] = r.fold_indices;
      m["fold_mae"] = r.fold_mae;
      m["fold_mse"] = r.fold_mse;
      m["skipped_folds"] = r.skipped_folds;
      m["skip_reasons"] = r.skip_reasons;
      m["hyperparameters"] = r.hyperparameters;
      methods.push_back(m);
    }
    j["methods"] = methods;
    write_text_file((fs::path(out_dir) / "comparison.json").string(), j.dump(2) + "\n");
  }
}

}  // namespace orars
