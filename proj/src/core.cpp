#include "crsom/core.hpp"

#include <cmath>
#include <fstream>
#include <string>

namespace crsom {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.name = name;
  out.num_classes = num_classes;
  out.class_names = class_names;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  out.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t i = indices[r];
    if (i >= size()) throw ArgumentError("subset index " + std::to_string(i) + " out of range");
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(i));
    out.labels.push_back(labels[i]);
  }
  return out;
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (auto y : labels) {
    if (y < num_classes) ++counts[y];
  }
  return counts;
}

void LabeledDataset::validate() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw DataError("dataset '" + name + "': feature rows and label count differ");
  if (!features.allFinite()) throw DataError("dataset '" + name + "': non-finite feature value");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes)
      throw DataError("dataset '" + name + "': label " + std::to_string(labels[i]) + " at row " +
                      std::to_string(i) + " exceeds class count " + std::to_string(num_classes));
  }
  const auto counts = class_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) throw DataError("dataset '" + name + "': class " + std::to_string(k) + " has no samples");
  }
}

std::pair<std::size_t, std::size_t> GridSpec::coords(std::size_t j) const {
  if (j >= size()) throw ArgumentError("neuron index " + std::to_string(j) + " outside grid");
  return {j / cols, j % cols};
}

std::size_t GridSpec::index(std::size_t row, std::size_t col) const {
  if (row >= rows || col >= cols) throw ArgumentError("grid coordinate outside grid");
  return row * cols + col;
}

void GridSpec::validate() const {
  if (rows == 0 || cols == 0) throw ArgumentError("grid dimensions must be positive");
}

void Schedule::validate() const {
  if (!(s_end > 0.0) || !std::isfinite(s_start)) throw ArgumentError("neighborhood widths must be positive and finite");
  if (!(s_start > s_end)) throw ArgumentError("s_start must exceed s_end");
  if (t_end < 1) throw ArgumentError("t_end must be at least 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ArgumentError("learning rate must be positive and finite");
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(seed_ + counter_ * kGamma);
}

double RngStream::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw ArgumentError("RngStream::below requires n > 0");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r = next_u64();
  while (r >= limit) r = next_u64();
  return r % n;
}

std::uint64_t RngStream::derive(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ (stream + 1) * kGamma);
}

std::string to_string(ProjectionSource source) {
  switch (source) {
    case ProjectionSource::crsom: return "crsom";
    case ProjectionSource::pca: return "pca";
    case ProjectionSource::lda: return "lda";
  }
  return "unknown";
}

double grid_distance(std::size_t a, std::size_t b, const GridSpec& grid) {
  const auto [ra, ca] = grid.coords(a);
  const auto [rb, cb] = grid.coords(b);
  const double dr = static_cast<double>(ra) - static_cast<double>(rb);
  const double dc = static_cast<double>(ca) - static_cast<double>(cb);
  return dr * dr + dc * dc;
}

Vector one_hot(std::size_t label, std::size_t num_classes) {
  if (label >= num_classes)
    throw ArgumentError("label " + std::to_string(label) + " not below class count " + std::to_string(num_classes));
  Vector v = Vector::Zero(static_cast<Eigen::Index>(num_classes));
  v[static_cast<Eigen::Index>(label)] = 1.0;
  return v;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace crsom
