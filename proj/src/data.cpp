#include "crsom/data.hpp"

#include <fmt/format.h>
#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <string_view>

namespace crsom {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

std::optional<double> parse_double(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};

std::vector<unsigned char> read_maybe_gzipped(const std::filesystem::path& path) {
  std::unique_ptr<gzFile_s, GzCloser> file(gzopen(path.string().c_str(), "rb"));
  if (!file) throw DataError("cannot open " + path.string());
  std::vector<unsigned char> bytes;
  std::vector<unsigned char> chunk(1 << 16);
  while (true) {
    const int got = gzread(file.get(), chunk.data(), static_cast<unsigned>(chunk.size()));
    if (got < 0) throw FormatError("corrupt compressed stream in " + path.string());
    if (got == 0) break;
    bytes.insert(bytes.end(), chunk.begin(), chunk.begin() + got);
  }
  return bytes;
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace

LabeledDataset load_delimited(const std::filesystem::path& path, const DelimitedSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  LabeledDataset data;
  data.name = schema.name.empty() ? path.stem().string() : schema.name;

  std::vector<std::vector<double>> rows;
  std::map<std::string, std::size_t, std::less<>> label_ids;
  std::optional<std::size_t> label_col;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = schema.has_header;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, schema.delimiter);

    if (!label_col) {
      width = cells.size();
      if (width < 2) throw DataError(fmt::format("{}:{}: need at least one feature and a label", path.string(), line_no));
      if (schema.label_name) {
        if (!schema.has_header) throw ArgumentError("label column by name requires a header row");
        const auto it = std::find(cells.begin(), cells.end(), *schema.label_name);
        if (it == cells.end()) throw DataError("no column named '" + *schema.label_name + "' in " + path.string());
        label_col = static_cast<std::size_t>(it - cells.begin());
      } else {
        const long idx = schema.label_index < 0 ? static_cast<long>(width) + schema.label_index : schema.label_index;
        if (idx < 0 || idx >= static_cast<long>(width))
          throw ArgumentError(fmt::format("label column {} outside {} columns", schema.label_index, width));
        label_col = static_cast<std::size_t>(idx);
      }
    }
    if (cells.size() != width)
      throw DataError(fmt::format("{}:{}: expected {} columns, found {}", path.string(), line_no, width, cells.size()));
    if (header_pending) {
      header_pending = false;
      continue;
    }

    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t c = 0; c < width; ++c) {
      if (c == *label_col) continue;
      const auto value = parse_double(cells[c]);
      if (!value)
        throw DataError(fmt::format("{}: row {} column {}: cannot parse '{}' as a number", path.string(), line_no,
                                    c + 1, cells[c]));
      row.push_back(*value);
    }
    const std::string label(cells[*label_col]);
    auto [it, inserted] = label_ids.try_emplace(label, data.class_names.size());
    if (inserted) data.class_names.push_back(label);
    data.labels.push_back(it->second);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("no samples in " + path.string());

  data.num_classes = data.class_names.size();
  data.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c + 1 < width; ++c) data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  data.validate();
  return data;
}

LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        std::optional<std::size_t> limit, std::uint64_t seed) {
  const auto image_bytes = read_maybe_gzipped(images);
  const auto label_bytes = read_maybe_gzipped(labels);
  if (image_bytes.size() < 16 || read_be32(image_bytes, 0) != 0x00000803)
    throw FormatError(images.string() + ": not an IDX image file (bad magic)");
  if (label_bytes.size() < 8 || read_be32(label_bytes, 0) != 0x00000801)
    throw FormatError(labels.string() + ": not an IDX label file (bad magic)");

  const std::size_t count = read_be32(image_bytes, 4);
  const std::size_t rows = read_be32(image_bytes, 8);
  const std::size_t cols = read_be32(image_bytes, 12);
  const std::size_t pixels = rows * cols;
  if (read_be32(label_bytes, 4) != count)
    throw FormatError(fmt::format("image count {} differs from label count {}", count, read_be32(label_bytes, 4)));
  if (image_bytes.size() < 16 + count * pixels) throw FormatError(images.string() + ": truncated image data");
  if (label_bytes.size() < 8 + count) throw FormatError(labels.string() + ": truncated label data");

  LabeledDataset data;
  data.name = "mnist";
  data.features.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
  data.labels.resize(count);
  std::size_t max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* px = image_bytes.data() + 16 + i * pixels;
    for (std::size_t p = 0; p < pixels; ++p)
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = px[p] / 255.0;
    data.labels[i] = label_bytes[8 + i];
    max_label = std::max(max_label, data.labels[i]);
  }
  data.num_classes = max_label + 1;
  for (std::size_t k = 0; k < data.num_classes; ++k) data.class_names.push_back(std::to_string(k));
  data.validate();
  if (limit && *limit < count) return stratified_subsample(data, *limit, seed);
  return data;
}

LabeledDataset stratified_subsample(const LabeledDataset& data, std::size_t count, std::uint64_t seed) {
  if (count == 0 || count > data.size()) throw ArgumentError("subsample size must be in [1, dataset size]");
  const auto counts = data.class_counts();
  const double ratio = static_cast<double>(count) / static_cast<double>(data.size());

  std::vector<std::size_t> quota(counts.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double exact = ratio * static_cast<double>(counts[k]);
    quota[k] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[k];
    remainders.emplace_back(exact - std::floor(exact), k);
  }
  // Largest remainder first; lower class index on ties.
  std::stable_sort(remainders.begin(), remainders.end(), [](auto a, auto b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < count; ++r) {
    ++quota[remainders[r % remainders.size()].second];
    ++assigned;
  }

  RngStream rng(seed);
  std::vector<std::size_t> chosen;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.labels[i] == k) members.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(members));
    chosen.insert(chosen.end(), members.begin(), members.begin() + static_cast<long>(quota[k]));
  }
  std::sort(chosen.begin(), chosen.end());
  return data.subset(chosen);
}

NormalizationParams fit_normalizer(const LabeledDataset& train, NormalizationKind kind, bool unit_total_variance) {
  if (train.empty()) throw ArgumentError("cannot fit a normalizer on an empty dataset");
  NormalizationParams params;
  params.kind = kind;
  params.unit_total_variance = unit_total_variance;
  const auto n = static_cast<double>(train.size());
  params.mean = train.features.colwise().sum() / n;
  const Matrix centered = train.features.rowwise() - params.mean;
  const RowVector variance = centered.array().square().colwise().sum() / n;
  if (kind == NormalizationKind::zscore) {
    params.scale = variance.array().sqrt();
  } else {
    const double shared = std::sqrt(variance.mean());
    params.scale = RowVector::Constant(variance.size(), shared);
    for (Eigen::Index c = 0; c < variance.size(); ++c) {
      if (variance[c] == 0.0) params.scale[c] = 0.0;
    }
  }
  if (unit_total_variance) {
    double total = 0.0;
    for (Eigen::Index c = 0; c < variance.size(); ++c) {
      if (params.scale[c] > 0.0) total += variance[c] / (params.scale[c] * params.scale[c]);
    }
    if (total > 0.0) params.scale *= std::sqrt(total);
  }
  return params;
}

Matrix apply_normalizer(const NormalizationParams& params, const Matrix& samples) {
  if (samples.cols() != params.mean.size()) throw ArgumentError("normalizer dimension does not match the samples");
  Matrix out(samples.rows(), samples.cols());
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    const double s = params.scale[c];
    if (s > 0.0) {
      out.col(c) = (samples.col(c).array() - params.mean[c]) / s;
    } else {
      out.col(c).setZero();
    }
  }
  return out;
}

LabeledDataset apply_normalizer(const NormalizationParams& params, const LabeledDataset& samples) {
  LabeledDataset out = samples;
  out.features = apply_normalizer(params, samples.features);
  return out;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  if (fold >= num_folds) throw ArgumentError("fold id out of range");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  if (fold >= num_folds) throw ArgumentError("fold id out of range");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan stratified_folds(const LabeledDataset& data, std::size_t num_folds, std::uint64_t seed) {
  if (num_folds < 2) throw ArgumentError("need at least 2 folds");
  if (num_folds > data.size())
    throw ArgumentError(fmt::format("{} folds requested for {} samples", num_folds, data.size()));

  FoldPlan plan;
  plan.num_folds = num_folds;
  plan.assignment.assign(data.size(), 0);
  RngStream rng(seed);
  std::size_t position = 0;
  for (std::size_t k = 0; k < data.num_classes; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.labels[i] == k) members.push_back(i);
    }
    if (members.size() < num_folds)
      plan.warnings.push_back(fmt::format("class {} has {} samples for {} folds; stratification is best-effort", k,
                                          members.size(), num_folds));
    rng.shuffle(std::span<std::size_t>(members));
    for (const auto i : members) plan.assignment[i] = position++ % num_folds;
  }
  return plan;
}

}  // namespace crsom
