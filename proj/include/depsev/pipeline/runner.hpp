#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "depsev/metrics.hpp"
#include "depsev/pipeline/config.hpp"
#include "depsev/relief.hpp"

namespace depsev::pipeline {

// Output layout under config.output:
//   features/<store>.csv, features/<store>.skipped.csv
//   features/text_model.txt, features/visual_pca.txt, features/visual_<split>.windows
//   models/<tag>.model, models/<tag>_baseline.model
//   predictions/<tag>_<split>.csv
//   reports/<tag>_<split>.csv, reports/<tag>_<split>.txt, reports/<tag>_train.txt
//   timings.log (wall clock; the only file that differs between identical runs)
// where <tag> is the feature store name, "_FS" when selection is active, and
// the model kind.
std::string run_tag(const ResolvedConfig& config);

struct ExtractSummary {
  std::string store;
  std::size_t sessions = 0;
  std::size_t skipped = 0;
  Eigen::Index dimension = 0;
};

ExtractSummary run_extract(const ResolvedConfig& config);

struct TrainSummary {
  std::string tag;
  std::size_t sessions = 0;
  Eigen::Index dimension = 0;
  std::vector<std::string> selected;  // feature selection only
  std::optional<selection::ReliefTuning> tuning;
  std::filesystem::path model_path;
};

TrainSummary run_train(const ResolvedConfig& config);

struct PredictionRow {
  std::string session_id;
  int fold = 0;
  std::optional<double> label;
  double prediction = 0.0;
  double baseline = 0.0;
  bool fallback = false;  // no usable features; baseline mean used
};

// Metrics over the labeled rows. EVS is NaN when it is undefined (fewer than
// two rows or constant labels).
struct SplitMetrics {
  std::size_t count = 0;
  MetricReport model;
  MetricReport baseline;
};

SplitMetrics metrics_of(const std::vector<PredictionRow>& rows);

struct RunReport {
  std::string tag;
  std::string split;
  std::string config_echo;
  Eigen::Index dimension = 0;
  std::vector<std::string> selected;
  std::string relief_choice;  // "threshold=..,k=.." or empty
  std::vector<std::string> warnings;
  std::size_t fallbacks = 0;
  SplitMetrics metrics;
  std::vector<std::pair<int, SplitMetrics>> folds;  // cross-validation only
};

// Evaluates the trained model on `split`: "train", "dev", or "test" when the
// corpus has a test_split.csv.
RunReport run_eval(const ResolvedConfig& config, const std::string& split = "dev");

enum class CvScheme { KFold, Loso };
CvScheme parse_cv_scheme(const std::string& text);
std::string to_string(CvScheme scheme);

// Cross-validation over the labeled training split; 3 stratified folds for
// KFold (relief.folds), one session per fold for Loso.
RunReport run_cv(const ResolvedConfig& config, CvScheme scheme);

selection::ReliefTuning run_tune_relief(const ResolvedConfig& config);

std::vector<PredictionRow> read_predictions(const std::filesystem::path& path);

}  // namespace depsev::pipeline
