#pragma once

// Restricted RBF network: a 2-D grid of reference vectors whose activations
// are gated by a winner-centred neighborhood, feeding a sigmoid output layer.
// Training is per-sample gradient descent on the squared output error; the
// winner positions of the trained grid form the CRSOM visualization.

#include "crsom/core.hpp"

#include <cstddef>
#include <vector>

namespace crsom {

using FeatureRef = Eigen::Ref<const RowVector>;

struct RrbfModel {
  GridSpec grid;
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  Matrix W;      // grid.size() x dim, reference vector per neuron
  Matrix V;      // grid.size() x num_classes, hidden -> output weights
  Vector theta;  // num_classes output biases
  Schedule schedule;

  // Shape and finiteness checks; throws ArgumentError.
  void validate() const;
};

struct ForwardTrace {
  Vector distances;     // I_j
  std::size_t winner = 0;
  Vector neighborhood;  // sigma(win, j) at the width used for this pass
  Vector hidden;        // sigma * exp(-I_j)
  Vector output;        // sigmoid outputs, empty after hidden_outputs()
};

// Update directions (negative loss gradient). dW omits the constant factor 2
// of d I / d W, which the learning rate absorbs.
struct GradientSet {
  Matrix dW;
  Matrix dV;
  Vector dTheta;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double train_error = 0.0;  // percent, from the online predictions of the epoch
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
};

struct FitResult {
  RrbfModel model;
  TrainTrace trace;
};

// Activation distances above this are clamped before exponentiation.
inline constexpr double kDistanceClamp = 700.0;
// Reference-vector update coefficients below this magnitude are treated as 0.
inline constexpr double kUpdateFlush = 1e-250;

// Squared Euclidean distance ||x - w||^2.
double activation_distance(FeatureRef x, FeatureRef w);

struct WinnerResult {
  std::size_t winner = 0;
  Vector distances;
};

// Nearest reference vector; ties go to the lowest neuron index.
WinnerResult find_winner(FeatureRef x, const RrbfModel& model);

// S(t) = s_start * (s_end / s_start)^(t / t_end); t >= t_end yields s_end.
double neighborhood_width(std::size_t epoch, const Schedule& sched);

// exp(-grid_distance(win, j) / S(t)).
double neighborhood_coeff(std::size_t win, std::size_t j, std::size_t epoch, const GridSpec& grid,
                          const Schedule& sched);

ForwardTrace hidden_outputs_at_width(FeatureRef x, const RrbfModel& model, double width);
ForwardTrace hidden_outputs(FeatureRef x, const RrbfModel& model, std::size_t epoch, const Schedule& sched);

ForwardTrace forward_at_width(FeatureRef x, const RrbfModel& model, double width);
ForwardTrace forward(FeatureRef x, const RrbfModel& model, std::size_t epoch, const Schedule& sched);

// E = 1/2 sum_k (T_k - O_k)^2.
double loss(const Vector& output, const Vector& target);

GradientSet backward(const ForwardTrace& trace, const Vector& target, FeatureRef x, const RrbfModel& model);

void apply_updates_in_place(RrbfModel& model, const GradientSet& grads, double eta);
RrbfModel apply_updates(RrbfModel model, const GradientSet& grads, double eta);

// W rows uniform within the per-feature [min, max] box of the data; V and
// theta uniform in [-0.1, 0.1]. Draws from RngStream(sched.seed).
RrbfModel initialize(const LabeledDataset& data, const GridSpec& grid, const Schedule& sched);

struct StepResult {
  double loss = 0.0;
  std::size_t predicted = 0;
};

// One fused forward/backward/update for a single sample. Produces exactly the
// model that backward() followed by apply_updates_in_place() would.
StepResult train_step(RrbfModel& model, FeatureRef x, std::size_t label, double width);

// t_end epochs of per-sample updates, sample order reshuffled every epoch.
FitResult fit(const LabeledDataset& data, const GridSpec& grid, const Schedule& sched);

// Same as fit() but continues from an already-initialized model.
FitResult fit_from(RrbfModel model, const LabeledDataset& data);

// Class with the largest output at the terminal width s_end.
std::size_t predict(FeatureRef x, const RrbfModel& model);
std::vector<std::size_t> predict_all(const Matrix& samples, const RrbfModel& model);

// Grid (row, col) of each sample's winner, as a CRSOM projection.
Projection2D project(const LabeledDataset& samples, const RrbfModel& model);

}  // namespace crsom
