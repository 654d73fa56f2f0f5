#include "crsom/rrbf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace crsom {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double gated_exp(double distance) { return std::exp(-std::min(distance, kDistanceClamp)); }

// Row coefficient of the reference-vector update; negligible values are
// flushed so that far neurons skip denormal arithmetic.
double update_coeff(double delta_hid, double sigma) {
  const double coeff = delta_hid * sigma;
  return std::abs(coeff) < kUpdateFlush ? 0.0 : coeff;
}

void check_input(FeatureRef x, const RrbfModel& model) {
  if (static_cast<std::size_t>(x.size()) != model.dim)
    throw ArgumentError("input has " + std::to_string(x.size()) + " features, model expects " +
                        std::to_string(model.dim));
}

Vector output_deltas(const Vector& output, const Vector& target) {
  return ((target - output).array() * output.array() * (1.0 - output.array())).matrix();
}

// e^{-I_i} * sum_k delta_k V_ik, evaluated against the pre-update V.
Vector hidden_deltas(const Matrix& V, const Vector& distances, const Vector& delta_out) {
  Vector weighted = V * delta_out;
  for (Eigen::Index i = 0; i < weighted.size(); ++i) weighted[i] *= gated_exp(distances[i]);
  return weighted;
}

}  // namespace

void RrbfModel::validate() const {
  grid.validate();
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (W.rows() != n || W.cols() != static_cast<Eigen::Index>(dim))
    throw ArgumentError("reference matrix shape does not match grid and input dimension");
  if (V.rows() != n || V.cols() != static_cast<Eigen::Index>(num_classes))
    throw ArgumentError("output weight shape does not match grid and class count");
  if (theta.size() != static_cast<Eigen::Index>(num_classes)) throw ArgumentError("bias length differs from class count");
  if (!W.allFinite() || !V.allFinite() || !theta.allFinite()) throw ArgumentError("model contains non-finite weights");
}

double activation_distance(FeatureRef x, FeatureRef w) {
  if (x.size() != w.size()) throw ArgumentError("activation_distance: length mismatch");
  return (x - w).squaredNorm();
}

WinnerResult find_winner(FeatureRef x, const RrbfModel& model) {
  check_input(x, model);
  WinnerResult result;
  const Eigen::Index n = model.W.rows();
  result.distances.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) result.distances[j] = (model.W.row(j) - x).squaredNorm();
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < n; ++j) {
    if (result.distances[j] < result.distances[best]) best = j;
  }
  result.winner = static_cast<std::size_t>(best);
  return result;
}

double neighborhood_width(std::size_t epoch, const Schedule& sched) {
  if (epoch == 0) return sched.s_start;
  if (epoch >= sched.t_end) return sched.s_end;
  const double fraction = static_cast<double>(epoch) / static_cast<double>(sched.t_end);
  return sched.s_start * std::pow(sched.s_end / sched.s_start, fraction);
}

double neighborhood_coeff(std::size_t win, std::size_t j, std::size_t epoch, const GridSpec& grid,
                          const Schedule& sched) {
  return std::exp(-grid_distance(win, j, grid) / neighborhood_width(epoch, sched));
}

ForwardTrace hidden_outputs_at_width(FeatureRef x, const RrbfModel& model, double width) {
  auto [winner, distances] = find_winner(x, model);
  ForwardTrace trace;
  trace.winner = winner;
  trace.distances = std::move(distances);
  const Eigen::Index n = trace.distances.size();
  trace.neighborhood.resize(n);
  trace.hidden.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double sigma = std::exp(-grid_distance(winner, static_cast<std::size_t>(j), model.grid) / width);
    trace.neighborhood[j] = sigma;
    trace.hidden[j] = sigma * gated_exp(trace.distances[j]);
  }
  return trace;
}

ForwardTrace hidden_outputs(FeatureRef x, const RrbfModel& model, std::size_t epoch, const Schedule& sched) {
  return hidden_outputs_at_width(x, model, neighborhood_width(epoch, sched));
}

ForwardTrace forward_at_width(FeatureRef x, const RrbfModel& model, double width) {
  ForwardTrace trace = hidden_outputs_at_width(x, model, width);
  trace.output = model.V.transpose() * trace.hidden - model.theta;
  for (Eigen::Index k = 0; k < trace.output.size(); ++k) trace.output[k] = sigmoid(trace.output[k]);
  return trace;
}

ForwardTrace forward(FeatureRef x, const RrbfModel& model, std::size_t epoch, const Schedule& sched) {
  return forward_at_width(x, model, neighborhood_width(epoch, sched));
}

double loss(const Vector& output, const Vector& target) {
  if (output.size() != target.size()) throw ArgumentError("loss: output and target lengths differ");
  return 0.5 * (target - output).squaredNorm();
}

GradientSet backward(const ForwardTrace& trace, const Vector& target, FeatureRef x, const RrbfModel& model) {
  check_input(x, model);
  const auto n = static_cast<Eigen::Index>(model.grid.size());
  const auto k = static_cast<Eigen::Index>(model.num_classes);
  if (trace.distances.size() != n || trace.hidden.size() != n || trace.neighborhood.size() != n ||
      trace.output.size() != k || target.size() != k)
    throw ArgumentError("backward: trace or target does not match the model shape");

  const Vector delta_out = output_deltas(trace.output, target);
  const Vector delta_hid = hidden_deltas(model.V, trace.distances, delta_out);

  GradientSet grads;
  grads.dV = trace.hidden * delta_out.transpose();
  grads.dTheta = -delta_out;
  grads.dW.resize(n, x.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double coeff = update_coeff(delta_hid[i], trace.neighborhood[i]);
    if (coeff == 0.0) {
      grads.dW.row(i).setZero();
    } else {
      grads.dW.row(i) = coeff * (x - model.W.row(i));
    }
  }
  return grads;
}

void apply_updates_in_place(RrbfModel& model, const GradientSet& grads, double eta) {
  if (grads.dW.rows() != model.W.rows() || grads.dW.cols() != model.W.cols() || grads.dV.rows() != model.V.rows() ||
      grads.dV.cols() != model.V.cols() || grads.dTheta.size() != model.theta.size())
    throw ArgumentError("apply_updates: gradient shapes do not match the model");
  model.W += eta * grads.dW;
  model.V += eta * grads.dV;
  model.theta += eta * grads.dTheta;
}

RrbfModel apply_updates(RrbfModel model, const GradientSet& grads, double eta) {
  apply_updates_in_place(model, grads, eta);
  return model;
}

RrbfModel initialize(const LabeledDataset& data, const GridSpec& grid, const Schedule& sched) {
  if (data.empty()) throw ArgumentError("cannot initialize from an empty dataset");
  grid.validate();
  RngStream rng(sched.seed);
  RrbfModel model;
  model.grid = grid;
  model.dim = data.dim();
  model.num_classes = data.num_classes;
  model.schedule = sched;
  const auto n = static_cast<Eigen::Index>(grid.size());
  const RowVector lo = data.features.colwise().minCoeff();
  const RowVector hi = data.features.colwise().maxCoeff();
  model.W.resize(n, data.features.cols());
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index c = 0; c < model.W.cols(); ++c) model.W(j, c) = rng.uniform(lo[c], hi[c]);
  }
  model.V.resize(n, static_cast<Eigen::Index>(data.num_classes));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < model.V.cols(); ++k) model.V(j, k) = rng.uniform(-0.1, 0.1);
  }
  model.theta.resize(static_cast<Eigen::Index>(data.num_classes));
  for (Eigen::Index k = 0; k < model.theta.size(); ++k) model.theta[k] = rng.uniform(-0.1, 0.1);
  return model;
}

StepResult train_step(RrbfModel& model, FeatureRef x, std::size_t label, double width) {
  const ForwardTrace trace = forward_at_width(x, model, width);
  const Vector target = one_hot(label, model.num_classes);
  const Vector delta_out = output_deltas(trace.output, target);
  const Vector delta_hid = hidden_deltas(model.V, trace.distances, delta_out);
  const double eta = model.schedule.eta;

  // Steps are materialized first so rounding matches backward() + apply_updates().
  RowVector step(model.W.cols());
  for (Eigen::Index i = 0; i < model.W.rows(); ++i) {
    const double coeff = update_coeff(delta_hid[i], trace.neighborhood[i]);
    if (coeff == 0.0) continue;
    step = coeff * (x - model.W.row(i));
    model.W.row(i) += eta * step;
  }
  const Matrix dV = trace.hidden * delta_out.transpose();
  model.V += eta * dV;
  const Vector dTheta = -delta_out;
  model.theta += eta * dTheta;
  return {loss(trace.output, target), argmax(trace.output)};
}

FitResult fit_from(RrbfModel model, const LabeledDataset& data) {
  if (data.empty()) throw ArgumentError("cannot fit on an empty dataset");
  model.validate();
  if (data.dim() != model.dim || data.num_classes != model.num_classes)
    throw ArgumentError("dataset shape does not match the model");
  const Schedule& sched = model.schedule;
  sched.validate();

  // Offset keeps the order stream disjoint from the one used by initialize().
  RngStream order_rng(RngStream::derive(sched.seed, 0x5EED));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  FitResult result;
  result.trace.epochs.reserve(sched.t_end);
  for (std::size_t epoch = 0; epoch < sched.t_end; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    const double width = neighborhood_width(epoch, sched);
    double total_loss = 0.0;
    std::size_t mistakes = 0;
    for (const std::size_t i : order) {
      const auto step = train_step(model, data.features.row(static_cast<Eigen::Index>(i)), data.labels[i], width);
      total_loss += step.loss;
      if (step.predicted != data.labels[i]) ++mistakes;
    }
    const auto n = static_cast<double>(data.size());
    result.trace.epochs.push_back({epoch, total_loss / n, 100.0 * static_cast<double>(mistakes) / n});
  }
  result.model = std::move(model);
  return result;
}

FitResult fit(const LabeledDataset& data, const GridSpec& grid, const Schedule& sched) {
  if (data.empty()) throw ArgumentError("cannot fit on an empty dataset");
  sched.validate();
  return fit_from(initialize(data, grid, sched), data);
}

std::size_t predict(FeatureRef x, const RrbfModel& model) {
  return argmax(forward_at_width(x, model, model.schedule.s_end).output);
}

std::vector<std::size_t> predict_all(const Matrix& samples, const RrbfModel& model) {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) out.push_back(predict(samples.row(i), model));
  return out;
}

Projection2D project(const LabeledDataset& samples, const RrbfModel& model) {
  if (samples.dim() != model.dim) throw ArgumentError("project: dataset dimension does not match the model");
  Projection2D projection;
  projection.source = ProjectionSource::crsom;
  projection.num_classes = samples.num_classes;
  projection.class_names = samples.class_names;
  projection.points.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto win = find_winner(samples.features.row(static_cast<Eigen::Index>(i)), model).winner;
    const auto [row, col] = model.grid.coords(win);
    projection.points.push_back({static_cast<double>(row), static_cast<double>(col), samples.labels[i]});
  }
  return projection;
}

}  // namespace crsom
