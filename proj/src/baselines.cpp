#include "crsom/baselines.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <utility>

namespace crsom {

namespace {

using ColMatrix = Eigen::MatrixXd;

// Columns ordered by descending eigenvalue, each flipped so that its
// largest-magnitude entry is positive.
void take_top(const Eigen::SelfAdjointEigenSolver<ColMatrix>& solver, std::size_t m, Matrix& basis,
              Vector& eigenvalues) {
  const Eigen::Index n = solver.eigenvalues().size();
  basis.resize(n, static_cast<Eigen::Index>(m));
  eigenvalues.resize(static_cast<Eigen::Index>(m));
  for (std::size_t c = 0; c < m; ++c) {
    const Eigen::Index src = n - 1 - static_cast<Eigen::Index>(c);
    Vector v = solver.eigenvectors().col(src);
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v[pivot] < 0) v = -v;
    basis.col(static_cast<Eigen::Index>(c)) = v;
    eigenvalues[static_cast<Eigen::Index>(c)] = solver.eigenvalues()[src];
  }
}

void fix_signs(Matrix& basis) {
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    Eigen::Index pivot = 0;
    basis.col(c).cwiseAbs().maxCoeff(&pivot);
    if (basis(pivot, c) < 0) basis.col(c) *= -1.0;
  }
}

}  // namespace

LinearProjector pca_fit(const LabeledDataset& data, std::size_t m) {
  if (m == 0) throw ArgumentError("PCA target dimension must be at least 1");
  if (m > data.dim()) throw ArgumentError(fmt::format("PCA target dimension {} exceeds input dimension {}", m, data.dim()));
  if (data.size() < 2) throw ArgumentError("PCA needs at least 2 samples");

  LinearProjector projector;
  projector.kind = ProjectionSource::pca;
  projector.mean = data.features.colwise().mean();
  const ColMatrix centered = data.features.rowwise() - projector.mean;
  const ColMatrix cov = (centered.transpose() * centered) / static_cast<double>(data.size() - 1);
  Eigen::SelfAdjointEigenSolver<ColMatrix> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("PCA eigendecomposition did not converge");
  take_top(solver, m, projector.basis, projector.eigenvalues);
  projector.eigenvalues = projector.eigenvalues.cwiseMax(0.0);
  projector.degenerate = cov.trace() == 0.0;
  return projector;
}

LinearProjector lda_fit(const LabeledDataset& data, std::size_t m) {
  if (m == 0) throw ArgumentError("LDA target dimension must be at least 1");
  if (data.num_classes < 2 || m > data.num_classes - 1)
    throw ArgumentError(fmt::format("LDA target dimension {} exceeds the rank bound K-1 = {}", m,
                                    data.num_classes < 1 ? 0 : data.num_classes - 1));
  if (m > data.dim()) throw ArgumentError(fmt::format("LDA target dimension {} exceeds input dimension {}", m, data.dim()));
  const auto counts = data.class_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 2) throw ArgumentError(fmt::format("LDA needs at least 2 samples per class; class {} has {}", k, counts[k]));
  }

  const auto d = static_cast<Eigen::Index>(data.dim());
  LinearProjector projector;
  projector.kind = ProjectionSource::lda;
  projector.mean = data.features.colwise().mean();

  Matrix class_means = Matrix::Zero(static_cast<Eigen::Index>(data.num_classes), d);
  for (std::size_t i = 0; i < data.size(); ++i)
    class_means.row(static_cast<Eigen::Index>(data.labels[i])) += data.features.row(static_cast<Eigen::Index>(i));
  for (std::size_t k = 0; k < data.num_classes; ++k)
    class_means.row(static_cast<Eigen::Index>(k)) /= static_cast<double>(counts[k]);

  ColMatrix within_dev(static_cast<Eigen::Index>(data.size()), d);
  for (std::size_t i = 0; i < data.size(); ++i)
    within_dev.row(static_cast<Eigen::Index>(i)) =
        data.features.row(static_cast<Eigen::Index>(i)) - class_means.row(static_cast<Eigen::Index>(data.labels[i]));
  ColMatrix sw = within_dev.transpose() * within_dev;

  ColMatrix between_dev(static_cast<Eigen::Index>(data.num_classes), d);
  for (std::size_t k = 0; k < data.num_classes; ++k)
    between_dev.row(static_cast<Eigen::Index>(k)) =
        std::sqrt(static_cast<double>(counts[k])) * (class_means.row(static_cast<Eigen::Index>(k)) - projector.mean);
  const ColMatrix sb = between_dev.transpose() * between_dev;

  Eigen::LLT<ColMatrix> llt(sw);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
    double ridge = 1e-6 * sw.trace() / static_cast<double>(d);
    if (!(ridge > 0.0)) ridge = 1e-12;
    sw.diagonal().array() += ridge;
    llt.compute(sw);
    if (llt.info() != Eigen::Success) throw std::runtime_error("LDA within-class scatter is not positive definite");
  }

  // Whitened problem L^-1 S_b L^-T y = lambda y, directions w = L^-T y.
  const auto lower = llt.matrixL();
  ColMatrix half = lower.solve(sb);
  ColMatrix whitened = lower.solve(half.transpose());
  whitened = 0.5 * (whitened + whitened.transpose());
  Eigen::SelfAdjointEigenSolver<ColMatrix> solver(whitened);
  if (solver.info() != Eigen::Success) throw std::runtime_error("LDA eigendecomposition did not converge");
  Matrix top;
  take_top(solver, m, top, projector.eigenvalues);
  const ColMatrix directions = llt.matrixU().solve(ColMatrix(top));
  projector.basis = directions;
  fix_signs(projector.basis);
  return projector;
}

Matrix transform(const LinearProjector& projector, const Matrix& samples) {
  if (static_cast<std::size_t>(samples.cols()) != projector.input_dim())
    throw ArgumentError(fmt::format("projector expects {} features, samples have {}", projector.input_dim(), samples.cols()));
  return (samples.rowwise() - projector.mean) * projector.basis;
}

LabeledDataset transform(const LinearProjector& projector, const LabeledDataset& samples) {
  LabeledDataset out;
  out.name = samples.name;
  out.labels = samples.labels;
  out.num_classes = samples.num_classes;
  out.class_names = samples.class_names;
  out.features = transform(projector, samples.features);
  return out;
}

Projection2D to_projection(const LinearProjector& projector, const LabeledDataset& samples) {
  const Matrix reduced = transform(projector, samples.features);
  Projection2D projection;
  projection.source = projector.kind;
  projection.num_classes = samples.num_classes;
  projection.class_names = samples.class_names;
  projection.points.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double v = reduced.cols() > 1 ? reduced(r, 1) : 0.0;
    projection.points.push_back({reduced(r, 0), v, samples.labels[i]});
  }
  return projection;
}

std::size_t knn_classify(const Matrix& train, std::span<const std::size_t> train_labels,
                         Eigen::Ref<const RowVector> query, std::size_t k) {
  if (train.rows() == 0) throw ArgumentError("kNN needs a non-empty training set");
  if (static_cast<std::size_t>(train.rows()) != train_labels.size())
    throw ArgumentError("kNN training rows and labels differ in count");
  if (k == 0 || k > train_labels.size()) throw ArgumentError(fmt::format("k = {} outside [1, {}]", k, train_labels.size()));
  if (query.size() != train.cols()) throw ArgumentError("kNN query dimension differs from training data");

  std::vector<std::pair<double, std::size_t>> ranked(train_labels.size());
  for (Eigen::Index i = 0; i < train.rows(); ++i)
    ranked[static_cast<std::size_t>(i)] = {(train.row(i) - query).squaredNorm(), static_cast<std::size_t>(i)};
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<long>(k), ranked.end());

  std::map<std::size_t, std::size_t> votes;
  for (std::size_t r = 0; r < k; ++r) ++votes[train_labels[ranked[r].second]];
  std::size_t best_label = 0;
  std::size_t best_votes = 0;
  for (const auto& [label, count] : votes) {
    if (count > best_votes) {
      best_label = label;
      best_votes = count;
    }
  }
  return best_label;
}

std::vector<std::size_t> knn_classify_all(const Matrix& train, std::span<const std::size_t> train_labels,
                                          const Matrix& queries, std::size_t k) {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(queries.rows()));
  for (Eigen::Index q = 0; q < queries.rows(); ++q) out.push_back(knn_classify(train, train_labels, queries.row(q), k));
  return out;
}

}  // namespace crsom
