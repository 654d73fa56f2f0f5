#pragma once

// Shared domain types for the rRBF / CRSOM toolkit: datasets, grid geometry,
// the annealing schedule, error types and the seeded random stream.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crsom {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Caller passed something outside an operation's domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data could not be read or violates a dataset invariant.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A serialized artifact or binary file is malformed.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

// A method configuration is incompatible with the dataset it targets.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An output file could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabeledSample {
  RowVector features;
  std::size_t label = 0;
};

// Row-major feature matrix with dense integer labels in [0, num_classes).
struct LabeledDataset {
  std::string name;
  Matrix features;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;
  std::vector<std::string> class_names;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  bool empty() const { return labels.empty(); }

  LabeledSample sample(std::size_t i) const { return {features.row(static_cast<Eigen::Index>(i)), labels.at(i)}; }

  // Rows in the given order; keeps num_classes and class names.
  LabeledDataset subset(std::span<const std::size_t> indices) const;

  // Per-class sample counts, length num_classes.
  std::vector<std::size_t> class_counts() const;

  // Throws DataError on non-finite features, out-of-range labels, or a
  // class with no samples. Loaders call this before returning.
  void validate() const;
};

struct GridSpec {
  std::size_t rows = 10;
  std::size_t cols = 10;

  std::size_t size() const { return rows * cols; }
  // (row, col) of neuron j; throws ArgumentError when j is out of range.
  std::pair<std::size_t, std::size_t> coords(std::size_t j) const;
  std::size_t index(std::size_t row, std::size_t col) const;
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

// Neighborhood annealing S_start -> S_end over t_end epochs, plus the
// learning rate and the seed that drives initialization and sample order.
struct Schedule {
  double s_start = 50.0;
  double s_end = 0.01;
  std::size_t t_end = 500;
  double eta = 0.1;
  std::uint64_t seed = 1;

  void validate() const;

  bool operator==(const Schedule&) const = default;
};

// Counter-based generator (SplitMix64 finalizer over seed + counter * gamma).
// Same seed gives the same stream on every platform; no ambient state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  // Seed for an independent sub-stream, e.g. one per cross-validation fold.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

enum class ProjectionSource { crsom, pca, lda };

struct ProjectedPoint {
  double u = 0.0;
  double v = 0.0;
  std::size_t label = 0;
};

// 2-D coordinates per sample, the common output of CRSOM, PCA and LDA.
struct Projection2D {
  std::vector<ProjectedPoint> points;
  ProjectionSource source = ProjectionSource::pca;
  std::size_t num_classes = 0;
  std::vector<std::string> class_names;
};

std::string to_string(ProjectionSource source);

// Squared Euclidean distance between the grid coordinates of neurons a and b.
double grid_distance(std::size_t a, std::size_t b, const GridSpec& grid);

Vector one_hot(std::size_t label, std::size_t num_classes);

// Index of the largest entry, lowest index on ties. Throws on empty input.
std::size_t argmax(std::span<const double> values);
inline std::size_t argmax(const Vector& values) { return argmax(std::span<const double>(values.data(), static_cast<std::size_t>(values.size()))); }

// Replaces the file contents; throws IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace crsom
