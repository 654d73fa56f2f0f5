#include "crsom/model_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace crsom {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

constexpr std::string_view kMagic = "crsom-artifact 1";

void put_row(std::string& out, std::string_view key, const double* values, Eigen::Index n) {
  out += key;
  for (Eigen::Index i = 0; i < n; ++i) out += " " + num(values[i]);
  out += "\n";
}

void put_vector(std::string& out, std::string_view key, const RowVector& v) { put_row(out, key, v.data(), v.size()); }
void put_vector(std::string& out, std::string_view key, const Vector& v) { put_row(out, key, v.data(), v.size()); }

void put_matrix(std::string& out, std::string_view name, const Matrix& m) {
  out += fmt::format("matrix {} {} {}\n", name, m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) put_row(out, "row", m.row(r).data(), m.cols());
}

class Reader {
 public:
  explicit Reader(std::string_view text) {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto end = text.find('\n', start);
      std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines_.emplace_back(line);
      if (end == std::string_view::npos) break;
      start = end + 1;
    }
    while (!lines_.empty() && lines_.back().empty()) lines_.pop_back();
  }

  bool done() const { return pos_ >= lines_.size(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(fmt::format("artifact line {}: {}", std::min(pos_ + 1, lines_.size() + 1), what));
  }

  const std::string* peek() const { return done() ? nullptr : &lines_[pos_]; }

  const std::string& next_line() {
    if (done()) fail("unexpected end of file");
    return lines_[pos_++];
  }

  // Next line split into whitespace tokens; the first must equal key.
  std::vector<std::string> expect(std::string_view key) {
    const auto& line = next_line();
    std::istringstream in(line);
    std::vector<std::string> tokens;
    for (std::string t; in >> t;) tokens.push_back(t);
    if (tokens.empty() || tokens.front() != key) {
      --pos_;
      fail(fmt::format("expected '{}'", key));
    }
    tokens.erase(tokens.begin());
    return tokens;
  }

  std::vector<std::string> expect(std::string_view key, std::size_t count) {
    auto tokens = expect(key);
    if (tokens.size() != count) {
      --pos_;
      fail(fmt::format("'{}' takes {} value(s), found {}", key, count, tokens.size()));
    }
    return tokens;
  }

  double to_double(const std::string& token) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
      --pos_;
      fail(fmt::format("bad number '{}'", token));
    }
    return value;
  }

  std::size_t to_size(const std::string& token) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      --pos_;
      fail(fmt::format("bad count '{}'", token));
    }
    return value;
  }

  template <typename Vec>
  Vec vector(std::string_view key, std::size_t n) {
    auto tokens = expect(key, n);
    Vec v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = to_double(tokens[i]);
    return v;
  }

  Matrix matrix(std::string_view name, std::size_t rows, std::size_t cols) {
    const auto head = expect("matrix", 3);
    if (head[0] != name || to_size(head[1]) != rows || to_size(head[2]) != cols) {
      --pos_;
      fail(fmt::format("expected matrix {} {} {}", name, rows, cols));
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) m.row(static_cast<Eigen::Index>(r)) = vector<RowVector>("row", cols);
    return m;
  }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

// Guard against absurd sizes in a corrupted header before allocating.
constexpr std::size_t kMaxEntries = std::size_t{1} << 31;

std::size_t checked_product(Reader& in, std::size_t a, std::size_t b) {
  if (a != 0 && b > kMaxEntries / a) in.fail("declared shape is too large");
  return a * b;
}

}  // namespace

std::size_t Artifact::input_dim() const {
  if (const auto* net = std::get_if<RrbfModel>(&model)) return net->dim;
  return std::get<LinearProjector>(model).input_dim();
}

std::string serialize_artifact(const Artifact& artifact) {
  std::string out(kMagic);
  out += "\n";
  const bool is_rrbf = std::holds_alternative<RrbfModel>(artifact.model);
  out += fmt::format("kind {}\n", is_rrbf ? "rrbf" : to_string(std::get<LinearProjector>(artifact.model).kind));
  out += fmt::format("classes {}\n", artifact.num_classes);
  if (!artifact.class_names.empty() && artifact.class_names.size() != artifact.num_classes)
    throw ArgumentError("class name count differs from class count");
  for (const auto& name : artifact.class_names) {
    if (name.find_first_of("\r\n") != std::string::npos) throw ArgumentError("class names may not contain line breaks");
    out += "class_name " + name + "\n";
  }
  if (artifact.normalizer) {
    const auto& n = *artifact.normalizer;
    out += fmt::format("normalizer {} {} {}\n", n.kind == NormalizationKind::zscore ? "zscore" : "isotropic",
                       n.unit_total_variance ? 1 : 0, n.mean.size());
    put_vector(out, "mean", n.mean);
    put_vector(out, "scale", n.scale);
  } else {
    out += "normalizer none\n";
  }
  if (is_rrbf) {
    const auto& m = std::get<RrbfModel>(artifact.model);
    out += fmt::format("grid {} {}\n", m.grid.rows, m.grid.cols);
    out += fmt::format("dim {}\n", m.dim);
    const auto& s = m.schedule;
    out += fmt::format("schedule {} {} {} {} {}\n", num(s.s_start), num(s.s_end), s.t_end, num(s.eta), s.seed);
    put_matrix(out, "W", m.W);
    put_matrix(out, "V", m.V);
    put_vector(out, "theta", m.theta);
  } else {
    const auto& p = std::get<LinearProjector>(artifact.model);
    out += fmt::format("projection {} {} {}\n", p.input_dim(), p.output_dim(), p.degenerate ? 1 : 0);
    put_vector(out, "mean", p.mean);
    put_matrix(out, "basis", p.basis);
    put_vector(out, "eigenvalues", p.eigenvalues);
  }
  out += "end\n";
  return out;
}

Artifact parse_artifact(std::string_view text) {
  Reader in(text);
  if (in.done() || in.next_line() != kMagic) throw FormatError("not a crsom artifact (bad or missing header)");

  Artifact artifact;
  const auto kind = in.expect("kind", 1)[0];
  if (kind != "rrbf" && kind != "pca" && kind != "lda") in.fail("unknown kind '" + kind + "'");
  artifact.num_classes = in.to_size(in.expect("classes", 1)[0]);
  if (artifact.num_classes > 100000) in.fail("class count is too large");
  // Names keep their inner spaces, so take the raw remainder of the line.
  while (const auto* line = in.peek()) {
    if (line->rfind("class_name ", 0) != 0) break;
    artifact.class_names.push_back(in.next_line().substr(11));
  }
  if (!artifact.class_names.empty() && artifact.class_names.size() != artifact.num_classes)
    in.fail("class name count differs from class count");

  const auto norm = in.expect("normalizer");
  if (norm.size() == 1 && norm[0] == "none") {
    artifact.normalizer.reset();
  } else if (norm.size() == 3 && (norm[0] == "zscore" || norm[0] == "isotropic") && (norm[1] == "0" || norm[1] == "1")) {
    NormalizationParams params;
    params.kind = norm[0] == "zscore" ? NormalizationKind::zscore : NormalizationKind::isotropic;
    params.unit_total_variance = norm[1] == "1";
    const auto d = in.to_size(norm[2]);
    if (d > kMaxEntries) in.fail("normalizer dimension is too large");
    params.mean = in.vector<RowVector>("mean", d);
    params.scale = in.vector<RowVector>("scale", d);
    if ((params.scale.array() < 0.0).any()) in.fail("normalizer scale must be non-negative");
    artifact.normalizer = std::move(params);
  } else {
    in.fail("malformed normalizer line");
  }

  if (kind == "rrbf") {
    RrbfModel m;
    const auto grid = in.expect("grid", 2);
    m.grid = {in.to_size(grid[0]), in.to_size(grid[1])};
    if (m.grid.rows == 0 || m.grid.cols == 0) in.fail("grid must be at least 1x1");
    m.dim = in.to_size(in.expect("dim", 1)[0]);
    m.num_classes = artifact.num_classes;
    const auto sched = in.expect("schedule", 5);
    m.schedule.s_start = in.to_double(sched[0]);
    m.schedule.s_end = in.to_double(sched[1]);
    m.schedule.t_end = in.to_size(sched[2]);
    m.schedule.eta = in.to_double(sched[3]);
    {
      std::uint64_t seed = 0;
      const auto& t = sched[4];
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), seed);
      if (ec != std::errc() || ptr != t.data() + t.size()) in.fail("bad seed '" + t + "'");
      m.schedule.seed = seed;
    }
    const auto neurons = checked_product(in, m.grid.rows, m.grid.cols);
    checked_product(in, neurons, std::max<std::size_t>(m.dim, m.num_classes));
    m.W = in.matrix("W", neurons, m.dim);
    m.V = in.matrix("V", neurons, m.num_classes);
    m.theta = in.vector<Vector>("theta", m.num_classes);
    try {
      m.validate();
      m.schedule.validate();
    } catch (const ArgumentError& e) {
      in.fail(e.what());
    }
    artifact.model = std::move(m);
  } else {
    LinearProjector p;
    p.kind = kind == "pca" ? ProjectionSource::pca : ProjectionSource::lda;
    const auto shape = in.expect("projection", 3);
    const auto d = in.to_size(shape[0]);
    const auto out_dim = in.to_size(shape[1]);
    if (shape[2] != "0" && shape[2] != "1") in.fail("degenerate flag must be 0 or 1");
    p.degenerate = shape[2] == "1";
    if (d == 0 || out_dim == 0 || out_dim > d) in.fail("projection shape is invalid");
    checked_product(in, d, out_dim);
    p.mean = in.vector<RowVector>("mean", d);
    p.basis = in.matrix("basis", d, out_dim);
    p.eigenvalues = in.vector<Vector>("eigenvalues", out_dim);
    artifact.model = std::move(p);
  }
  if (artifact.normalizer && static_cast<std::size_t>(artifact.normalizer->mean.size()) != artifact.input_dim())
    in.fail("normalizer dimension differs from model input dimension");

  in.expect("end", 0);
  if (!in.done()) in.fail("trailing content after 'end'");
  return artifact;
}

void save_artifact(const std::filesystem::path& path, const Artifact& artifact) {
  write_text_file(path, serialize_artifact(artifact));
}

Artifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open artifact " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_artifact(buffer.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace crsom
