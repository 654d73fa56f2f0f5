#pragma once

#include "crsom/core.hpp"
#include "crsom/data.hpp"
#include "crsom/rrbf.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace testing {

inline std::filesystem::path data_dir() { return CRSOM_TEST_DATA_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("crsom-tests-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline crsom::DelimitedSchema csv_schema(bool header, long label_index = -1) {
  crsom::DelimitedSchema s;
  s.has_header = header;
  s.label_index = label_index;
  return s;
}

inline crsom::LabeledDataset iris() { return crsom::load_delimited(data_dir() / "iris.csv", csv_schema(true)); }
inline crsom::LabeledDataset wine() { return crsom::load_delimited(data_dir() / "wine.csv", csv_schema(true, 0)); }
inline crsom::LabeledDataset balance() {
  return crsom::load_delimited(data_dir() / "balance-scale.csv", csv_schema(false, 0));
}
inline crsom::LabeledDataset mnist() {
  return crsom::load_idx(data_dir() / "mnist-10k-images-idx3-ubyte.gz", data_dir() / "mnist-10k-labels-idx1-ubyte.gz");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline oracle::Net to_oracle(const crsom::RrbfModel& m) {
  oracle::Net net;
  net.rows = m.grid.rows;
  net.cols = m.grid.cols;
  for (Eigen::Index j = 0; j < m.W.rows(); ++j) {
    net.W.emplace_back(m.W.row(j).data(), m.W.row(j).data() + m.W.cols());
    net.V.emplace_back(m.V.row(j).data(), m.V.row(j).data() + m.V.cols());
  }
  net.theta.assign(m.theta.data(), m.theta.data() + m.theta.size());
  return net;
}

inline oracle::Vec to_vec(const crsom::RowVector& x) { return {x.data(), x.data() + x.size()}; }

// Model with every parameter uniform in [-scale, scale].
inline crsom::RrbfModel random_model(crsom::RngStream& rng, std::size_t rows, std::size_t cols, std::size_t d,
                                     std::size_t k, double scale = 1.0) {
  crsom::RrbfModel m;
  m.grid = {rows, cols};
  m.dim = d;
  m.num_classes = k;
  const auto n = static_cast<Eigen::Index>(rows * cols);
  m.W.resize(n, static_cast<Eigen::Index>(d));
  m.V.resize(n, static_cast<Eigen::Index>(k));
  m.theta.resize(static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < m.W.size(); ++i) m.W.data()[i] = rng.uniform(-scale, scale);
  for (Eigen::Index i = 0; i < m.V.size(); ++i) m.V.data()[i] = rng.uniform(-scale, scale);
  for (Eigen::Index i = 0; i < m.theta.size(); ++i) m.theta[i] = rng.uniform(-scale, scale);
  return m;
}

inline crsom::RowVector random_point(crsom::RngStream& rng, std::size_t d, double scale = 1.0) {
  crsom::RowVector x(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-scale, scale);
  return x;
}

// Box-Muller normal draw.
inline double normal(crsom::RngStream& rng) {
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Two isotropic Gaussian blobs centred at (-2, 0) and (2, 0), sd 0.5, half the
// samples each, labels 0 then 1 interleaved.
inline crsom::LabeledDataset two_blobs(std::size_t n, std::uint64_t seed) {
  crsom::RngStream rng(seed);
  crsom::LabeledDataset data;
  data.name = "blobs";
  data.num_classes = 2;
  data.class_names = {"left", "right"};
  data.features.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % 2;
    const auto r = static_cast<Eigen::Index>(i);
    data.features(r, 0) = (label == 0 ? -2.0 : 2.0) + 0.5 * normal(rng);
    data.features(r, 1) = 0.5 * normal(rng);
    data.labels.push_back(label);
  }
  return data;
}

}  // namespace testing
