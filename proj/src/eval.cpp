#include "crsom/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace crsom {

std::string to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::rrbf: return "rrbf";
    case MethodKind::pca_knn: return "pca_knn";
    case MethodKind::lda_knn: return "lda_knn";
    case MethodKind::knn_raw: return "knn_raw";
  }
  return "unknown";
}

MethodKind parse_method_kind(const std::string& text) {
  if (text == "rrbf") return MethodKind::rrbf;
  if (text == "pca_knn") return MethodKind::pca_knn;
  if (text == "lda_knn") return MethodKind::lda_knn;
  if (text == "knn_raw") return MethodKind::knn_raw;
  throw ConfigError("unknown method '" + text + "' (expected rrbf, pca_knn, lda_knn or knn_raw)");
}

std::string MethodSpec::label() const {
  switch (kind) {
    case MethodKind::rrbf: return "rRBF";
    case MethodKind::pca_knn: return fmt::format("PCA({}-D)", dim);
    case MethodKind::lda_knn: return fmt::format("LDA({}-D)", dim);
    case MethodKind::knn_raw: return "NN";
  }
  return "unknown";
}

void validate_method(const MethodSpec& method, const LabeledDataset& data) {
  const std::string name = method.label();
  if (data.empty()) throw ConfigError(name + ": dataset is empty");
  switch (method.kind) {
    case MethodKind::rrbf:
      try {
        method.grid.validate();
        method.schedule.validate();
      } catch (const ArgumentError& e) {
        throw ConfigError(name + ": " + e.what());
      }
      return;
    case MethodKind::pca_knn:
      if (method.dim == 0 || method.dim > data.dim())
        throw ConfigError(fmt::format("{}: target dimension {} outside [1, {}]", name, method.dim, data.dim()));
      break;
    case MethodKind::lda_knn:
      if (method.dim == 0 || data.num_classes < 2 || method.dim > data.num_classes - 1)
        throw ConfigError(fmt::format("{}: target dimension {} exceeds K-1 = {} for {} classes", name, method.dim,
                                      data.num_classes < 1 ? 0 : data.num_classes - 1, data.num_classes));
      if (method.dim > data.dim())
        throw ConfigError(fmt::format("{}: target dimension {} exceeds input dimension {}", name, method.dim, data.dim()));
      break;
    case MethodKind::knn_raw: break;
  }
  if (method.k == 0 || method.k >= data.size())
    throw ConfigError(fmt::format("{}: k = {} must be in [1, {})", name, method.k, data.size()));
}

FoldModel fit_fold(const MethodSpec& method, const LabeledDataset& train, std::uint64_t fold_seed) {
  FoldModel model;
  model.normalizer = fit_normalizer(train, method.preprocessing.kind, method.preprocessing.unit_total_variance);
  const LabeledDataset normalized = apply_normalizer(model.normalizer, train);
  model.reference_labels = normalized.labels;
  switch (method.kind) {
    case MethodKind::rrbf: {
      Schedule sched = method.schedule;
      sched.seed = fold_seed;
      model.reducer = fit(normalized, method.grid, sched).model;
      model.reference_labels.clear();
      break;
    }
    case MethodKind::pca_knn: {
      auto projector = pca_fit(normalized, method.dim);
      model.reference_points = transform(projector, normalized.features);
      model.reducer = std::move(projector);
      break;
    }
    case MethodKind::lda_knn: {
      auto projector = lda_fit(normalized, method.dim);
      model.reference_points = transform(projector, normalized.features);
      model.reducer = std::move(projector);
      break;
    }
    case MethodKind::knn_raw: model.reference_points = normalized.features; break;
  }
  return model;
}

std::vector<std::size_t> predict_fold(const MethodSpec& method, const FoldModel& model, const Matrix& samples) {
  const Matrix normalized = apply_normalizer(model.normalizer, samples);
  if (const auto* net = std::get_if<RrbfModel>(&model.reducer)) return predict_all(normalized, *net);
  if (const auto* projector = std::get_if<LinearProjector>(&model.reducer))
    return knn_classify_all(model.reference_points, model.reference_labels, transform(*projector, normalized), method.k);
  return knn_classify_all(model.reference_points, model.reference_labels, normalized, method.k);
}

double error_rate(std::span<const std::size_t> predictions, std::span<const std::size_t> truth) {
  if (predictions.empty()) throw ArgumentError("error_rate of an empty prediction set");
  if (predictions.size() != truth.size()) throw ArgumentError("error_rate: prediction and truth lengths differ");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) wrong += predictions[i] != truth[i] ? 1 : 0;
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(predictions.size());
}

std::string EvalReport::cell() const { return fmt::format("{:.1f} ({:.1f})", mean, stddev); }

void summarize(EvalReport& report) {
  if (report.fold_errors.empty()) {
    report.mean = report.stddev = 0.0;
    return;
  }
  const auto n = static_cast<double>(report.fold_errors.size());
  report.mean = std::accumulate(report.fold_errors.begin(), report.fold_errors.end(), 0.0) / n;
  double ss = 0.0;
  for (const double e : report.fold_errors) ss += (e - report.mean) * (e - report.mean);
  report.stddev = std::sqrt(ss / n);
}

EvalReport cross_validate(const MethodSpec& method, const LabeledDataset& data, const FoldPlan& plan) {
  validate_method(method, data);
  if (plan.assignment.size() != data.size())
    throw ConfigError(fmt::format("fold plan covers {} samples, dataset has {}", plan.assignment.size(), data.size()));

  const auto start = std::chrono::steady_clock::now();
  EvalReport report;
  report.dataset = data.name;
  report.method = method;
  for (std::size_t fold = 0; fold < plan.num_folds; ++fold) {
    const auto train_idx = plan.train_indices(fold);
    const auto test_idx = plan.test_indices(fold);
    if (test_idx.empty()) continue;
    const LabeledDataset train = data.subset(train_idx);
    const LabeledDataset test = data.subset(test_idx);
    const FoldModel model = fit_fold(method, train, RngStream::derive(method.schedule.seed, fold));
    report.fold_errors.push_back(error_rate(predict_fold(method, model, test.features), test.labels));
  }
  summarize(report);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<EvalReport> dimension_sweep(const MethodSpec& method, const LabeledDataset& data, const FoldPlan& plan,
                                        std::span<const std::size_t> dims) {
  if (method.kind != MethodKind::pca_knn && method.kind != MethodKind::lda_knn)
    throw ConfigError("dimension sweep applies to pca_knn and lda_knn only");
  for (const auto m : dims) {
    MethodSpec candidate = method;
    candidate.dim = m;
    try {
      validate_method(candidate, data);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("sweep at m = {}: {}", m, e.what()));
    }
  }
  std::vector<EvalReport> reports;
  for (const auto m : dims) {
    MethodSpec candidate = method;
    candidate.dim = m;
    reports.push_back(cross_validate(candidate, data, plan));
  }
  return reports;
}

std::string format_report_table(std::span<const ReportRow> rows, char delimiter) {
  std::string out = "Dataset";
  if (!rows.empty()) {
    for (const auto& r : rows.front().reports) out += delimiter + r.method.label();
  }
  out += '\n';
  for (const auto& row : rows) {
    out += row.dataset;
    for (const auto& r : row.reports) out += delimiter + r.cell();
    out += '\n';
  }
  return out;
}

void write_report_table(const std::filesystem::path& path, std::span<const ReportRow> rows) {
  write_text_file(path, format_report_table(rows));
}

nlohmann::json report_to_json(const EvalReport& report) {
  const auto& m = report.method;
  nlohmann::json method = {
      {"kind", to_string(m.kind)},
      {"label", m.label()},
      {"k", m.k},
      {"normalization", m.preprocessing.kind == NormalizationKind::zscore ? "zscore" : "isotropic"},
      {"unit_total_variance", m.preprocessing.unit_total_variance},
  };
  if (m.kind == MethodKind::pca_knn || m.kind == MethodKind::lda_knn) method["dim"] = m.dim;
  if (m.kind == MethodKind::rrbf) {
    method["grid"] = {m.grid.rows, m.grid.cols};
    method["schedule"] = {{"s_start", m.schedule.s_start},
                          {"s_end", m.schedule.s_end},
                          {"t_end", m.schedule.t_end},
                          {"eta", m.schedule.eta}};
  }
  return {
      {"dataset", report.dataset},
      {"method", method},
      {"master_seed", m.schedule.seed},
      {"fold_errors", report.fold_errors},
      {"mean", report.mean},
      {"stddev", report.stddev},
      {"stddev_convention", "population"},
      {"cell", report.cell()},
  };
}

}  // namespace crsom
