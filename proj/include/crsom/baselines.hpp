#pragma once

// Linear dimension reduction baselines (PCA, Fisher LDA) and brute-force
// k-nearest-neighbor classification in the reduced or original space.

#include "crsom/core.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace crsom {

struct LinearProjector {
  ProjectionSource kind = ProjectionSource::pca;
  RowVector mean;       // length d
  Matrix basis;         // d x m, one projection direction per column
  Vector eigenvalues;   // length m, non-increasing
  bool degenerate = false;  // PCA on data with zero total variance

  std::size_t input_dim() const { return static_cast<std::size_t>(basis.rows()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(basis.cols()); }
};

// Top-m eigenvectors of the sample covariance. Labels are ignored.
LinearProjector pca_fit(const LabeledDataset& data, std::size_t m);

// Top-m generalized eigenvectors of (S_b, S_w). Directions are scaled so the
// within-class scatter is the identity in the reduced space. S_w gets a ridge
// of 1e-6 * trace(S_w) / d when it is numerically singular.
LinearProjector lda_fit(const LabeledDataset& data, std::size_t m);

// (x - mean) * basis for every row.
Matrix transform(const LinearProjector& projector, const Matrix& samples);
LabeledDataset transform(const LinearProjector& projector, const LabeledDataset& samples);

// First two reduced coordinates per sample; a single direction is drawn as (u, 0).
Projection2D to_projection(const LinearProjector& projector, const LabeledDataset& samples);

// Majority label of the k Euclidean-nearest training rows. Distance ties go
// to the lower training index, vote ties to the smaller class index.
std::size_t knn_classify(const Matrix& train, std::span<const std::size_t> train_labels,
                         Eigen::Ref<const RowVector> query, std::size_t k);
std::vector<std::size_t> knn_classify_all(const Matrix& train, std::span<const std::size_t> train_labels,
                                          const Matrix& queries, std::size_t k);

}  // namespace crsom
