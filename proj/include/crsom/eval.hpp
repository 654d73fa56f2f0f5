#pragma once

// Cross-validation harness: fits normalizer and method on each training
// portion, scores the held-out fold, and summarizes error rates as
// mean (population standard deviation) cells.

#include "crsom/baselines.hpp"
#include "crsom/core.hpp"
#include "crsom/data.hpp"
#include "crsom/rrbf.hpp"

#include "json.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace crsom {

enum class MethodKind { rrbf, pca_knn, lda_knn, knn_raw };

std::string to_string(MethodKind kind);
MethodKind parse_method_kind(const std::string& text);  // throws ConfigError

struct Preprocessing {
  NormalizationKind kind = NormalizationKind::zscore;
  bool unit_total_variance = true;
};

struct MethodSpec {
  MethodKind kind = MethodKind::rrbf;
  std::size_t dim = 2;  // target dimension for pca_knn / lda_knn
  std::size_t k = 3;    // neighbors for the kNN methods
  GridSpec grid;
  Schedule schedule;  // schedule.seed is the master seed; folds derive their own
  Preprocessing preprocessing;

  // Column label in the style "rRBF", "PCA(2-D)", "LDA(1-D)", "NN".
  std::string label() const;
};

// Throws ConfigError when the method cannot run on this dataset.
void validate_method(const MethodSpec& method, const LabeledDataset& data);

// Everything learned from one training portion.
struct FoldModel {
  NormalizationParams normalizer;
  std::variant<std::monostate, RrbfModel, LinearProjector> reducer;
  Matrix reference_points;  // normalized (and reduced) training rows for kNN
  std::vector<std::size_t> reference_labels;
};

FoldModel fit_fold(const MethodSpec& method, const LabeledDataset& train, std::uint64_t fold_seed);
std::vector<std::size_t> predict_fold(const MethodSpec& method, const FoldModel& model, const Matrix& samples);

// 100 * mismatches / n.
double error_rate(std::span<const std::size_t> predictions, std::span<const std::size_t> truth);

struct EvalReport {
  std::string dataset;
  MethodSpec method;
  std::vector<double> fold_errors;  // percent
  double mean = 0.0;
  double stddev = 0.0;  // population (divides by the fold count)
  double wall_seconds = 0.0;

  std::string cell() const;  // "m.m (s.s)"
};

void summarize(EvalReport& report);

EvalReport cross_validate(const MethodSpec& method, const LabeledDataset& data, const FoldPlan& plan);

// One report per target dimension; configuration errors name the offending m.
std::vector<EvalReport> dimension_sweep(const MethodSpec& method, const LabeledDataset& data, const FoldPlan& plan,
                                        std::span<const std::size_t> dims);

struct ReportRow {
  std::string dataset;
  std::vector<EvalReport> reports;
};

// Delimited table, one row per dataset and one "mean (sd)" cell per method.
std::string format_report_table(std::span<const ReportRow> rows, char delimiter = ',');
void write_report_table(const std::filesystem::path& path, std::span<const ReportRow> rows);

// Full detail (per-fold errors, seeds, statistic conventions); excludes timing.
nlohmann::json report_to_json(const EvalReport& report);

}  // namespace crsom
