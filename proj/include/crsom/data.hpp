#pragma once

// Dataset ingestion (delimited text, MNIST-style IDX), feature
// normalization, and stratified cross-validation fold assignment.

#include "crsom/core.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace crsom {

struct DelimitedSchema {
  // Label column by header name (requires has_header) or by index; negative
  // indices count from the end, so -1 is the last column.
  std::optional<std::string> label_name;
  long label_index = -1;
  char delimiter = ',';
  bool has_header = false;
  std::string name;  // dataset name; defaults to the file stem
};

// Numeric feature columns plus one label column. Labels may be symbolic and
// are mapped to dense indices in order of first appearance.
LabeledDataset load_delimited(const std::filesystem::path& path, const DelimitedSchema& schema = {});

// IDX image/label pair (gzip-compressed files are accepted). Pixels are scaled
// to [0, 1]. With a limit, a seeded stratified subsample of exactly that many
// samples is returned.
LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        std::optional<std::size_t> limit = std::nullopt, std::uint64_t seed = 0);

// Proportional per-class allocation (largest remainder), members drawn at
// random within each class; output keeps the original relative order.
LabeledDataset stratified_subsample(const LabeledDataset& data, std::size_t count, std::uint64_t seed);

enum class NormalizationKind {
  zscore,     // per-feature mean / standard deviation
  isotropic,  // per-feature mean, one shared scale (root mean per-feature variance)
};

struct NormalizationParams {
  NormalizationKind kind = NormalizationKind::zscore;
  bool unit_total_variance = false;
  RowVector mean;
  RowVector scale;  // divisor per feature; 0 marks a constant feature
};

// Statistics come from `train` only. With unit_total_variance the result is
// further divided by one global factor so that the mean squared distance of
// the training rows to their centroid is 1.
NormalizationParams fit_normalizer(const LabeledDataset& train, NormalizationKind kind = NormalizationKind::zscore,
                                   bool unit_total_variance = false);
LabeledDataset apply_normalizer(const NormalizationParams& params, const LabeledDataset& samples);
Matrix apply_normalizer(const NormalizationParams& params, const Matrix& samples);

struct FoldPlan {
  std::size_t num_folds = 0;
  std::vector<std::size_t> assignment;  // sample index -> fold id
  std::vector<std::string> warnings;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

// Each class is shuffled with the seed, classes are concatenated in label
// order and dealt round-robin over the folds, so per-class and total fold
// sizes differ by at most one.
FoldPlan stratified_folds(const LabeledDataset& data, std::size_t num_folds, std::uint64_t seed);

}  // namespace crsom
