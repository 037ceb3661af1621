#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "orars/io.hpp"
#include "orars/sorars.hpp"
#include "orars/train.hpp"
#include "orars/types.hpp"

namespace orars {

enum class Method { grnn, sorars, orars };

std::string method_name(Method m);
Method method_from_string(const std::string& s);

enum class GridMode { none, full, restricted, automatic };

std::string to_string(GridMode m);
GridMode grid_mode_from_string(const std::string& s);

/// Cross-validated experiment settings. The fixed model configs apply when
/// grid == none; otherwise the grid picks hidden/dropout/lr per fold and the
/// batch/epoch schedule still comes from here. clf_batch == 0 selects the
/// size rule (32 below 8000 samples, 8192 otherwise).
struct ExperimentConfig {
  int k = 5;
  std::uint64_t seed = 0;
  int jobs = 1;
  GridMode grid = GridMode::none;

  Index grnn_hidden = 64;
  double grnn_dropout = 0.0;
  double grnn_lr = 1e-3;
  int grnn_batch = 32;
  int grnn_epochs = 256;

  Index clf_hidden = 64;
  double clf_dropout = 0.0;
  double clf_lr = 1e-3;
  int clf_batch = 0;
  int clf_epochs = 8;

  void validate() const;
  std::map<std::string, std::string> echo() const;

  static const std::vector<std::string>& known_keys();
  static ExperimentConfig from_kv(const KeyValueConfig& kv);
};

/// Test-only injection points (e.g. replacing the trained regressor by an
/// oracle). Empty by default.
struct RunHooks {
  std::function<RegressorFn(int fold, const Dataset& anchors)> regressor_override;
};

MetricsReport run_grnn(const Dataset& dataset, const ExperimentConfig& config);
MetricsReport run_sorars(const Dataset& dataset, const ExperimentConfig& config,
                         const RunHooks& hooks = {});
MetricsReport run_orars(const Dataset& dataset, const ExperimentConfig& config);

/// Side-by-side evaluation over one shared fold plan and shared per-fold
/// normalization statistics.
struct ComparisonReport {
  std::string dataset_name;
  Index size = 0;
  double min_label = 0.0;
  double max_label = 0.0;
  Index attributes = 0;
  std::uint64_t seed = 0;

  FoldPlan folds;
  std::vector<Method> methods;
  std::vector<MetricsReport> reports;       // parallel to methods
  std::vector<std::string> fold_winners;    // per fold: lowest-MAE method, "-" if none finished
};

ComparisonReport compare(const Dataset& dataset, const ExperimentConfig& config,
                         const std::vector<Method>& methods = {Method::grnn, Method::sorars,
                                                               Method::orars},
                         const RunHooks& hooks = {});

std::string comparison_table_text(const ComparisonReport& report);

/// Writes comparison.txt / comparison.csv / per_fold.csv / comparison.json
/// under out_dir.
void write_comparison_outputs(const ComparisonReport& report, const std::string& out_dir);

}  // namespace orars
