// Command-line front end: train, compare, project, sweep.

#include "crsom/baselines.hpp"
#include "crsom/core.hpp"
#include "crsom/data.hpp"
#include "crsom/eval.hpp"
#include "crsom/model_io.hpp"
#include "crsom/rrbf.hpp"
#include "crsom/viz.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

struct DataArgs {
  std::string data;
  std::string labels;  // IDX label file; switches --data to IDX images
  std::string label_col = "-1";
  std::string delimiter = ",";
  bool header = false;
  std::size_t limit = 0;
  std::string normalize = "auto";
  bool raw_scale = false;
};

struct RrbfArgs {
  std::string grid = "10x10";
  std::size_t epochs = 500;
  double eta = 0.1;
  double s_start = 50.0;
  double s_end = 0.01;
};

struct RunConfig {
  std::string command;
  DataArgs data;
  RrbfArgs rrbf;
  std::vector<std::string> methods;
  std::size_t dim = 2;
  std::size_t k = 3;
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  std::string model;
  std::string dims;
  std::string out = "out";
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--data", a.data, "Delimited data file, or IDX image file when --labels is given")->required();
  cmd->add_option("--labels", a.labels, "IDX label file (gzip accepted)");
  cmd->add_option("--label-col", a.label_col, "Label column: header name or index, negative counts from the end")
      ->capture_default_str();
  cmd->add_option("--delimiter", a.delimiter, "Field delimiter (single character, or 'tab')")->capture_default_str();
  cmd->add_flag("--header", a.header, "First row is a header");
  cmd->add_option("--limit", a.limit, "Seeded stratified subsample of this many samples (0 = all)")->capture_default_str();
  cmd->add_option("--normalize", a.normalize, "zscore, isotropic, or auto (isotropic for IDX images)")
      ->check(CLI::IsMember({"auto", "zscore", "isotropic"}))
      ->capture_default_str();
  cmd->add_flag("--raw-scale", a.raw_scale, "Skip the unit-total-variance rescaling after normalization");
}

void add_rrbf_options(CLI::App* cmd, RrbfArgs& a) {
  cmd->add_option("--grid", a.grid, "Map size RxC")->capture_default_str();
  cmd->add_option("--epochs", a.epochs, "Training epochs t_end")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--eta", a.eta, "Learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--s-start", a.s_start, "Initial neighborhood width")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--s-end", a.s_end, "Final neighborhood width")->check(CLI::PositiveNumber)->capture_default_str();
}

crsom::GridSpec parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  crsom::GridSpec grid;
  auto parse = [&](std::string_view part, std::size_t& out) {
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc() && ptr == part.data() + part.size() && !part.empty();
  };
  const std::string_view view(text);
  if (x == std::string::npos || !parse(view.substr(0, x), grid.rows) || !parse(view.substr(x + 1), grid.cols))
    throw crsom::ConfigError("--grid expects RxC, got '" + text + "'");
  try {
    grid.validate();
  } catch (const crsom::ArgumentError& e) {
    throw crsom::ConfigError(std::string("--grid: ") + e.what());
  }
  return grid;
}

crsom::Schedule make_schedule(const RunConfig& cfg) {
  crsom::Schedule s;
  s.s_start = cfg.rrbf.s_start;
  s.s_end = cfg.rrbf.s_end;
  s.t_end = cfg.rrbf.epochs;
  s.eta = cfg.rrbf.eta;
  s.seed = cfg.seed;
  try {
    s.validate();
  } catch (const crsom::ArgumentError& e) {
    throw crsom::ConfigError(e.what());
  }
  return s;
}

bool is_idx(const DataArgs& a) { return !a.labels.empty(); }

crsom::Preprocessing make_preprocessing(const DataArgs& a) {
  crsom::Preprocessing p;
  const bool isotropic = a.normalize == "isotropic" || (a.normalize == "auto" && is_idx(a));
  p.kind = isotropic ? crsom::NormalizationKind::isotropic : crsom::NormalizationKind::zscore;
  p.unit_total_variance = !a.raw_scale;
  return p;
}

crsom::LabeledDataset load_dataset(const DataArgs& a, std::uint64_t seed) {
  const std::optional<std::size_t> limit = a.limit > 0 ? std::optional<std::size_t>(a.limit) : std::nullopt;
  if (is_idx(a)) return crsom::load_idx(a.data, a.labels, limit, seed);

  crsom::DelimitedSchema schema;
  if (a.delimiter == "tab" || a.delimiter == "\\t") {
    schema.delimiter = '\t';
  } else if (a.delimiter.size() == 1) {
    schema.delimiter = a.delimiter[0];
  } else {
    throw crsom::ConfigError("--delimiter must be a single character or 'tab'");
  }
  schema.has_header = a.header;
  long index = 0;
  const auto& col = a.label_col;
  const auto [ptr, ec] = std::from_chars(col.data(), col.data() + col.size(), index);
  if (ec == std::errc() && ptr == col.data() + col.size()) {
    schema.label_index = index;
  } else {
    if (!a.header) throw crsom::ConfigError("--label-col by name requires --header");
    schema.label_name = col;
  }
  auto data = crsom::load_delimited(a.data, schema);
  if (limit) data = crsom::stratified_subsample(data, *limit, seed);
  return data;
}

// "pca_knn" or "pca_knn:3"; an explicit dimension is kept as given.
crsom::MethodSpec parse_method(const std::string& text, const RunConfig& cfg, const crsom::LabeledDataset& data) {
  crsom::MethodSpec m;
  const auto colon = text.find(':');
  m.kind = crsom::parse_method_kind(text.substr(0, colon));
  m.k = cfg.k;
  m.grid = parse_grid(cfg.rrbf.grid);
  m.schedule = make_schedule(cfg);
  m.preprocessing = make_preprocessing(cfg.data);
  m.dim = cfg.dim;
  if (colon != std::string::npos) {
    const auto part = text.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), m.dim);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty())
      throw crsom::ConfigError("bad dimension in method '" + text + "'");
  } else if (m.kind == crsom::MethodKind::lda_knn && data.num_classes >= 2) {
    m.dim = std::min(m.dim, data.num_classes - 1);
  }
  return m;
}

json manifest(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["data"] = {{"data", cfg.data.data},           {"labels", cfg.data.labels},       {"label_col", cfg.data.label_col},
               {"delimiter", cfg.data.delimiter}, {"header", cfg.data.header},       {"limit", cfg.data.limit},
               {"normalize", cfg.data.normalize}, {"raw_scale", cfg.data.raw_scale}};
  j["rrbf"] = {{"grid", cfg.rrbf.grid},
               {"epochs", cfg.rrbf.epochs},
               {"eta", cfg.rrbf.eta},
               {"s_start", cfg.rrbf.s_start},
               {"s_end", cfg.rrbf.s_end}};
  j["methods"] = cfg.methods;
  j["dim"] = cfg.dim;
  j["k"] = cfg.k;
  j["folds"] = cfg.folds;
  j["seed"] = cfg.seed;
  j["model"] = cfg.model;
  j["dims"] = cfg.dims;
  j["out"] = cfg.out;
  return j;
}

void write_json(const fs::path& path, const json& j) { crsom::write_text_file(path, j.dump(2) + "\n"); }

fs::path prepare_out(const RunConfig& cfg) {
  const fs::path out(cfg.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw crsom::IoError("cannot create output directory " + out.string());
  write_json(out / "manifest.json", manifest(cfg));
  return out;
}

crsom::FigureSpec scatter_spec(const std::string& title, crsom::ProjectionSource source) {
  crsom::FigureSpec spec;
  spec.title = title;
  if (source == crsom::ProjectionSource::crsom) {
    spec.x_label = "map row";
    spec.y_label = "map column";
  } else {
    spec.x_label = "component 1";
    spec.y_label = "component 2";
  }
  return spec;
}

int cmd_train(const RunConfig& cfg) {
  const auto grid = parse_grid(cfg.rrbf.grid);
  const auto sched = make_schedule(cfg);
  const auto pre = make_preprocessing(cfg.data);
  const auto data = load_dataset(cfg.data, cfg.seed);
  const auto out = prepare_out(cfg);

  const auto normalizer = crsom::fit_normalizer(data, pre.kind, pre.unit_total_variance);
  const auto normalized = crsom::apply_normalizer(normalizer, data);
  const auto result = crsom::fit(normalized, grid, sched);

  crsom::Artifact artifact{result.model, normalizer, data.num_classes, data.class_names};
  crsom::save_artifact(out / "model.crsom", artifact);

  const auto curve = crsom::learning_curve(result.trace);
  crsom::FigureSpec curve_spec{fmt::format("Learning curve ({})", data.name), "epoch", "training error (%)"};
  crsom::export_curve(curve, curve_spec, out / "learning_curve.svg");
  crsom::export_scatter(crsom::project(normalized, result.model),
                        scatter_spec(fmt::format("CRSOM ({})", data.name), crsom::ProjectionSource::crsom),
                        out / "crsom.svg");

  const double train_error = crsom::error_rate(crsom::predict_all(normalized.features, result.model), normalized.labels);
  fmt::print("trained rRBF on {} ({} samples, {} features, {} classes)\n", data.name, data.size(), data.dim(),
             data.num_classes);
  fmt::print("final training error: {:.2f}%\n", train_error);
  fmt::print("wrote {}\n", (out / "model.crsom").string());
  return 0;
}

int cmd_compare(const RunConfig& cfg) {
  const auto data = load_dataset(cfg.data, cfg.seed);
  std::vector<crsom::MethodSpec> methods;
  for (const auto& text : cfg.methods) methods.push_back(parse_method(text, cfg, data));
  for (const auto& m : methods) crsom::validate_method(m, data);
  if (cfg.folds < 2 || cfg.folds > data.size())
    throw crsom::ConfigError(fmt::format("--folds must be in [2, {}]", data.size()));
  const auto plan = crsom::stratified_folds(data, cfg.folds, cfg.seed);
  for (const auto& w : plan.warnings) fmt::print(stderr, "warning: {}\n", w);
  const auto out = prepare_out(cfg);

  crsom::ReportRow row{data.name, {}};
  json reports = json::array();
  for (const auto& m : methods) {
    auto report = crsom::cross_validate(m, data, plan);
    fmt::print("{:<10} {:>12}   ({:.1f} s)\n", m.label(), report.cell(), report.wall_seconds);
    reports.push_back(crsom::report_to_json(report));
    row.reports.push_back(std::move(report));
  }
  crsom::write_report_table(out / "report.csv", std::span<const crsom::ReportRow>(&row, 1));
  write_json(out / "report.json", json{{"dataset", data.name}, {"folds", cfg.folds}, {"reports", reports}});

  // One figure and one saved artifact per reducing method, fitted on the whole dataset.
  for (const auto& m : methods) {
    if (m.kind == crsom::MethodKind::knn_raw) continue;
    const auto normalizer = crsom::fit_normalizer(data, m.preprocessing.kind, m.preprocessing.unit_total_variance);
    const auto normalized = crsom::apply_normalizer(normalizer, data);
    crsom::Projection2D projection;
    std::string stem;
    crsom::Artifact artifact{crsom::LinearProjector{}, normalizer, data.num_classes, data.class_names};
    if (m.kind == crsom::MethodKind::rrbf) {
      auto model = crsom::fit(normalized, m.grid, m.schedule).model;
      projection = crsom::project(normalized, model);
      artifact.model = std::move(model);
      stem = "crsom";
    } else {
      auto projector = m.kind == crsom::MethodKind::pca_knn ? crsom::pca_fit(normalized, m.dim)
                                                            : crsom::lda_fit(normalized, m.dim);
      projection = crsom::to_projection(projector, normalized);
      artifact.model = std::move(projector);
      stem = fmt::format("{}{}d", m.kind == crsom::MethodKind::pca_knn ? "pca" : "lda", m.dim);
    }
    crsom::save_artifact(out / (stem + ".crsom"), artifact);
    crsom::export_scatter(projection, scatter_spec(fmt::format("{}: {}", m.label(), data.name), projection.source),
                          out / (stem + ".svg"));
  }
  std::cout << crsom::format_report_table(std::span<const crsom::ReportRow>(&row, 1), '\t');
  return 0;
}

int cmd_project(const RunConfig& cfg) {
  const auto artifact = crsom::load_artifact(cfg.model);
  const auto data = load_dataset(cfg.data, cfg.seed);
  if (data.dim() != artifact.input_dim())
    throw crsom::DataError(fmt::format("model expects {} features, dataset has {}", artifact.input_dim(), data.dim()));
  const auto out = prepare_out(cfg);
  const auto normalized = artifact.normalizer ? crsom::apply_normalizer(*artifact.normalizer, data) : data;

  crsom::Projection2D projection;
  if (const auto* net = std::get_if<crsom::RrbfModel>(&artifact.model)) {
    projection = crsom::project(normalized, *net);
  } else {
    projection = crsom::to_projection(std::get<crsom::LinearProjector>(artifact.model), normalized);
  }
  if (!artifact.class_names.empty() && data.class_names.empty()) projection.class_names = artifact.class_names;
  crsom::export_scatter(projection, scatter_spec(fmt::format("{} projection: {}", crsom::to_string(projection.source), data.name),
                                                 projection.source),
                        out / "projection.svg");
  fmt::print("projected {} samples to {}\n", projection.points.size(), (out / "projection.csv").string());
  return 0;
}

std::vector<std::size_t> parse_dims(const std::string& text, const crsom::LabeledDataset& data, crsom::MethodKind kind) {
  std::vector<std::size_t> dims;
  if (text.empty() || text == "all") {
    const std::size_t top = kind == crsom::MethodKind::lda_knn ? std::min(data.dim(), data.num_classes - 1) : data.dim();
    for (std::size_t m = 1; m <= top; ++m) dims.push_back(m);
    return dims;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size())
      throw crsom::ConfigError("--dims expects a comma-separated list of integers or 'all'");
    dims.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (!std::is_sorted(dims.begin(), dims.end()) || std::adjacent_find(dims.begin(), dims.end()) != dims.end())
    throw crsom::ConfigError("--dims must be strictly increasing");
  return dims;
}

int cmd_sweep(const RunConfig& cfg) {
  const auto data = load_dataset(cfg.data, cfg.seed);
  if (cfg.methods.size() != 1) throw crsom::ConfigError("sweep takes exactly one --method (pca_knn or lda_knn)");
  auto method = parse_method(cfg.methods.front(), cfg, data);
  const auto dims = parse_dims(cfg.dims, data, method.kind);
  if (cfg.folds < 2 || cfg.folds > data.size())
    throw crsom::ConfigError(fmt::format("--folds must be in [2, {}]", data.size()));
  const auto plan = crsom::stratified_folds(data, cfg.folds, cfg.seed);
  const auto reports = crsom::dimension_sweep(method, data, plan, dims);
  const auto out = prepare_out(cfg);

  json all = json::array();
  for (const auto& r : reports) {
    fmt::print("m = {:<4} {:>12}\n", r.method.dim, r.cell());
    all.push_back(crsom::report_to_json(r));
  }
  write_json(out / "sweep.json", json{{"dataset", data.name}, {"folds", cfg.folds}, {"reports", all}});
  const auto curve = crsom::sweep_curve(reports);
  const std::string name = method.kind == crsom::MethodKind::pca_knn ? "PCA" : "LDA";
  crsom::export_curve(curve, {fmt::format("Classification {} ({})", data.name, name), "dimension", "error rate (%)"},
                      out / "sweep.svg");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rRBF / CRSOM dimension reduction toolkit"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* train = app.add_subcommand("train", "Fit an rRBF on a whole dataset and save the model");
  add_data_options(train, cfg.data);
  add_rrbf_options(train, cfg.rrbf);
  train->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  train->add_option("--out", cfg.out, "Output directory")->capture_default_str();

  auto* compare = app.add_subcommand("compare", "Cross-validate several methods on one dataset");
  add_data_options(compare, cfg.data);
  add_rrbf_options(compare, cfg.rrbf);
  compare->add_option("--method", cfg.methods, "rrbf, pca_knn[:m], lda_knn[:m], knn_raw (repeatable)")
      ->default_str("rrbf pca_knn lda_knn knn_raw");
  compare->add_option("--dim", cfg.dim, "Target dimension for pca_knn / lda_knn")->capture_default_str();
  compare->add_option("--k", cfg.k, "Neighbors for kNN")->check(CLI::PositiveNumber)->capture_default_str();
  compare->add_option("--folds", cfg.folds, "Cross-validation folds")->capture_default_str();
  compare->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  compare->add_option("--out", cfg.out, "Output directory")->capture_default_str();

  auto* project = app.add_subcommand("project", "Project a dataset through a saved model");
  project->add_option("--model", cfg.model, "Artifact written by train or compare")->required();
  add_data_options(project, cfg.data);
  project->add_option("--seed", cfg.seed, "Seed for --limit")->capture_default_str();
  project->add_option("--out", cfg.out, "Output directory")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Error rate against reduced dimension");
  add_data_options(sweep, cfg.data);
  sweep->add_option("--method", cfg.methods, "pca_knn or lda_knn")->required();
  sweep->add_option("--dims", cfg.dims, "Comma-separated dimensions, or 'all'")->capture_default_str();
  sweep->add_option("--k", cfg.k, "Neighbors for kNN")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--folds", cfg.folds, "Cross-validation folds")->capture_default_str();
  sweep->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  sweep->add_option("--out", cfg.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train) {
      cfg.command = "train";
      return cmd_train(cfg);
    }
    if (*compare) {
      cfg.command = "compare";
      if (cfg.methods.empty()) cfg.methods = {"rrbf", "pca_knn", "lda_knn", "knn_raw"};
      return cmd_compare(cfg);
    }
    if (*project) {
      cfg.command = "project";
      return cmd_project(cfg);
    }
    cfg.command = "sweep";
    return cmd_sweep(cfg);
  } catch (const crsom::ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return kExitUsage;
  } catch (const crsom::ArgumentError& e) {
    fmt::print(stderr, "invalid argument: {}\n", e.what());
    return kExitUsage;
  } catch (const crsom::DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitRuntime;
  }
}
