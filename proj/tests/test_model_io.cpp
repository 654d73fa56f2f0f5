#include "doctest.h"

#include "crsom/model_io.hpp"
#include "helpers.hpp"

using namespace crsom;

namespace {

Artifact rrbf_artifact() {
  RngStream rng(21);
  auto model = testing::random_model(rng, 3, 4, 5, 3, 1.0);
  model.schedule.s_start = 12.5;
  model.schedule.s_end = 0.3;
  model.schedule.t_end = 77;
  model.schedule.eta = 0.05;
  model.schedule.seed = 0xFFFFFFFFFFFFFFFFULL;
  // Values that need every digit.
  model.W(0, 0) = 0.1 + 0.2;
  model.V(1, 2) = 1.0 / 3.0;
  model.theta[0] = -5e-324;
  NormalizationParams norm;
  norm.kind = NormalizationKind::isotropic;
  norm.unit_total_variance = true;
  norm.mean = testing::random_point(rng, 5);
  norm.scale = RowVector::Constant(5, 2.0 / 7.0);
  norm.scale[3] = 0.0;
  return Artifact{model, norm, 3, {"setosa", "with space", ""}};
}

Artifact projector_artifact(ProjectionSource kind) {
  const auto data = testing::iris();
  const auto projector = kind == ProjectionSource::pca ? pca_fit(data, 2) : lda_fit(data, 2);
  return Artifact{projector, fit_normalizer(data, NormalizationKind::zscore, true), data.num_classes, data.class_names};
}

void check_same(const Artifact& a, const Artifact& b) {
  CHECK(a.num_classes == b.num_classes);
  CHECK(a.class_names == b.class_names);
  REQUIRE(a.normalizer.has_value() == b.normalizer.has_value());
  if (a.normalizer) {
    CHECK(a.normalizer->kind == b.normalizer->kind);
    CHECK(a.normalizer->unit_total_variance == b.normalizer->unit_total_variance);
    CHECK(a.normalizer->mean == b.normalizer->mean);
    CHECK(a.normalizer->scale == b.normalizer->scale);
  }
  REQUIRE(a.model.index() == b.model.index());
  if (const auto* m = std::get_if<RrbfModel>(&a.model)) {
    const auto& n = std::get<RrbfModel>(b.model);
    CHECK(m->grid.rows == n.grid.rows);
    CHECK(m->grid.cols == n.grid.cols);
    CHECK(m->W == n.W);
    CHECK(m->V == n.V);
    CHECK(m->theta == n.theta);
    CHECK(m->schedule.s_start == n.schedule.s_start);
    CHECK(m->schedule.s_end == n.schedule.s_end);
    CHECK(m->schedule.t_end == n.schedule.t_end);
    CHECK(m->schedule.eta == n.schedule.eta);
    CHECK(m->schedule.seed == n.schedule.seed);
  } else {
    const auto& p = std::get<LinearProjector>(a.model);
    const auto& q = std::get<LinearProjector>(b.model);
    CHECK(p.kind == q.kind);
    CHECK(p.mean == q.mean);
    CHECK(p.basis == q.basis);
    CHECK(p.eigenvalues == q.eigenvalues);
    CHECK(p.degenerate == q.degenerate);
  }
}

std::string replace_line(std::string text, const std::string& prefix, const std::string& with) {
  const auto at = text.find("\n" + prefix);
  REQUIRE(at != std::string::npos);
  const auto end = text.find('\n', at + 1);
  return text.replace(at + 1, end - at - 1, with);
}

}  // namespace

TEST_CASE("artifacts round-trip exactly") {
  for (const auto& a : {rrbf_artifact(), projector_artifact(ProjectionSource::pca), projector_artifact(ProjectionSource::lda)}) {
    const auto text = serialize_artifact(a);
    const auto b = parse_artifact(text);
    check_same(a, b);
    CHECK(serialize_artifact(b) == text);
  }
  auto bare = rrbf_artifact();
  bare.normalizer.reset();
  bare.class_names.clear();
  check_same(bare, parse_artifact(serialize_artifact(bare)));
}

TEST_CASE("saved files reload and predictions agree") {
  const auto dir = testing::scratch_dir("model-io");
  const auto a = rrbf_artifact();
  save_artifact(dir / "m.crsom", a);
  const auto b = load_artifact(dir / "m.crsom");
  check_same(a, b);
  RngStream rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto x = testing::random_point(rng, 5);
    CHECK(predict(x, std::get<RrbfModel>(a.model)) == predict(x, std::get<RrbfModel>(b.model)));
  }
  CHECK(a.input_dim() == 5);
  CHECK_THROWS_AS(load_artifact(dir / "missing.crsom"), DataError);
  CHECK_THROWS_AS(save_artifact(dir / "nope" / "m.crsom", a), IoError);
}

TEST_CASE("corrupted artifacts are rejected") {
  const auto good = serialize_artifact(rrbf_artifact());
  CHECK_THROWS_AS(parse_artifact(""), FormatError);
  CHECK_THROWS_AS(parse_artifact("hello\n"), FormatError);
  CHECK_THROWS_AS(parse_artifact(good.substr(0, good.size() / 2)), FormatError);
  CHECK_THROWS_AS(parse_artifact(good + "extra\n"), FormatError);
  CHECK_THROWS_AS(parse_artifact(replace_line(good, "kind", "kind svm")), FormatError);
  CHECK_THROWS_AS(parse_artifact(replace_line(good, "grid", "grid 3 5")), FormatError);
  CHECK_THROWS_AS(parse_artifact(replace_line(good, "grid", "grid 99999999999 99999999999")), FormatError);
  CHECK_THROWS_AS(parse_artifact(replace_line(good, "theta", "theta 1 2 nan")), FormatError);
  CHECK_THROWS_AS(parse_artifact(replace_line(good, "theta", "theta 1 2 x")), FormatError);
  CHECK_THROWS_AS(parse_artifact(replace_line(good, "theta", "theta 1 2")), FormatError);
  CHECK_THROWS_AS(parse_artifact(replace_line(good, "schedule", "schedule 1 5 10 0.1 1")), FormatError);
  CHECK_THROWS_AS(parse_artifact(replace_line(good, "normalizer", "normalizer zscore 1 4")), FormatError);

  const auto dir = testing::scratch_dir("model-io-bad");
  crsom::write_text_file(dir / "bad.crsom", good.substr(0, 40));
  try {
    load_artifact(dir / "bad.crsom");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("bad.crsom") != std::string::npos);
  }
}
