#include "doctest.h"

#include "crsom/eval.hpp"
#include "crsom/viz.hpp"
#include "helpers.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <charconv>
#include <set>
#include <sstream>

using namespace crsom;
namespace pt = boost::property_tree;

namespace {

pt::ptree parse_xml(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  pt::read_xml(in, tree);
  return tree;
}

// Every element in document order whose class attribute equals cls.
void collect(const pt::ptree& node, const std::string& cls, std::vector<pt::ptree>& out) {
  for (const auto& [name, child] : node) {
    if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
    if (child.get<std::string>("<xmlattr>.class", "") == cls) out.push_back(child);
    collect(child, cls, out);
  }
}

std::vector<pt::ptree> elements(const std::string& svg, const std::string& cls) {
  std::vector<pt::ptree> out;
  collect(parse_xml(svg), cls, out);
  return out;
}

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  REQUIRE(res.ec == std::errc());
  REQUIRE(res.ptr == s.data() + s.size());
  return v;
}

Projection2D three_points() {
  Projection2D p;
  p.source = ProjectionSource::pca;
  p.num_classes = 2;
  p.class_names = {"a", "b"};
  p.points = {{0.1, 0.2, 0}, {-1.5, 3.0, 1}, {2.0, -0.25, 0}};
  return p;
}

}  // namespace

TEST_CASE("scatter of three points has three markers and a legend") {
  const auto svg = render_scatter_svg(three_points(), {.title = "pts & <more>"});
  const auto markers = elements(svg, "marker");
  CHECK(markers.size() == 3);
  CHECK(elements(svg, "legend").size() == 1);
  CHECK(elements(svg, "legend-marker").size() == 2);
  std::multiset<std::string> labels;
  for (const auto& m : markers) labels.insert(m.get<std::string>("<xmlattr>.data-label"));
  CHECK(labels == std::multiset<std::string>{"0", "0", "1"});
  CHECK(svg.find("pts &amp; &lt;more&gt;") != std::string::npos);
}

TEST_CASE("scatter markers and the companion csv carry the same numbers") {
  Projection2D p = three_points();
  p.points.push_back({0.1 + 0.2, 1.0 / 3.0, 1});
  const auto svg = render_scatter_svg(p, {});
  const auto rows = split_csv(scatter_csv(p));
  REQUIRE(rows.size() == p.points.size() + 1);
  CHECK(rows[0] == std::vector<std::string>{"u", "v", "label"});
  const auto markers = elements(svg, "marker");
  REQUIRE(markers.size() == p.points.size());
  std::multiset<std::vector<std::string>> from_svg, from_csv;
  for (const auto& m : markers)
    from_svg.insert({m.get<std::string>("<xmlattr>.data-u"), m.get<std::string>("<xmlattr>.data-v"),
                     m.get<std::string>("<xmlattr>.data-label")});
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    const auto& r = rows[i + 1];
    CHECK(parse_double(r[0]) == p.points[i].u);
    CHECK(parse_double(r[1]) == p.points[i].v);
    CHECK(r[2] == std::to_string(p.points[i].label));
    from_csv.insert(r);
  }
  CHECK(from_svg == from_csv);
}

TEST_CASE("export writes both files and rejects bad targets") {
  const auto dir = testing::scratch_dir("viz");
  export_scatter(three_points(), {}, dir / "fig.svg");
  CHECK(testing::read_file(dir / "fig.svg") == render_scatter_svg(three_points(), {}));
  CHECK(testing::read_file(dir / "fig.csv") == scatter_csv(three_points()));
  CHECK_THROWS_AS(export_scatter(three_points(), {}, dir / "fig.csv"), ArgumentError);
  CHECK_THROWS_AS(export_scatter(three_points(), {}, dir / "no-such-dir" / "fig.svg"), IoError);
  const std::vector<CurvePoint> one{{1.0, 2.0, {}}};
  CHECK_THROWS_AS(export_curve(one, {}, dir / "no-such-dir" / "c.svg"), IoError);
}

TEST_CASE("rendering is byte-identical across calls") {
  const auto a = render_scatter_svg(three_points(), {.title = "t"});
  CHECK(a == render_scatter_svg(three_points(), {.title = "t"}));
  const std::vector<CurvePoint> c{{1, 5, 0.5}, {2, 4, 0.25}};
  CHECK(render_curve_svg(c, {}) == render_curve_svg(c, {}));
}

TEST_CASE("class styles are distinct for the first 26 classes") {
  std::set<std::pair<std::string, int>> seen;
  for (std::size_t k = 0; k < kMaxStyledClasses; ++k) {
    const auto s = class_style(k);
    CHECK(s.color.size() == 7);
    CHECK(s.color[0] == '#');
    seen.insert({s.color, static_cast<int>(s.shape)});
  }
  CHECK(seen.size() == kMaxStyledClasses);
  CHECK(class_style(3).color == class_style(3).color);
}

TEST_CASE("CRSOM scatter sits on the grid with at most one marker per cell and class") {
  const auto data = testing::two_blobs(40, 5);
  Schedule s;
  s.t_end = 100;
  s.seed = 2;
  const auto fit_result = fit(data, {5, 5}, s);
  const auto proj = project(data, fit_result.model);
  const auto svg = render_scatter_svg(proj, {});
  const auto markers = elements(svg, "marker");
  CHECK(markers.size() <= 25 * 2);
  std::set<std::pair<std::string, std::string>> cells;
  std::size_t total = 0;
  for (const auto& m : markers) {
    const double u = parse_double(m.get<std::string>("<xmlattr>.data-u"));
    const double v = parse_double(m.get<std::string>("<xmlattr>.data-v"));
    CHECK(u == std::floor(u));
    CHECK(v == std::floor(v));
    CHECK(u >= 0.0);
    CHECK(u < 5.0);
    cells.insert({m.get<std::string>("<xmlattr>.data-u"), m.get<std::string>("<xmlattr>.data-v")});
    total += std::stoul(m.get<std::string>("<xmlattr>.data-count"));
  }
  CHECK(cells.size() <= 25);
  CHECK(total == 40);
  // The companion file keeps one row per sample.
  CHECK(split_csv(scatter_csv(proj)).size() == 41);
}

TEST_CASE("curves validate their input") {
  const std::vector<CurvePoint> single{{1.0, 3.0, {}}};
  CHECK_NOTHROW(render_curve_svg(single, {}));
  CHECK(elements(render_curve_svg(single, {}), "series").size() == 1);
  const std::vector<CurvePoint> back{{1, 1, {}}, {3, 2, {}}, {2, 3, {}}};
  CHECK_THROWS_AS(render_curve_svg(back, {}), ArgumentError);
  const std::vector<CurvePoint> repeat{{1, 1, {}}, {1, 2, {}}};
  CHECK_THROWS_AS(render_curve_svg(repeat, {}), ArgumentError);
  const std::vector<CurvePoint> nan{{1, std::nan(""), {}}};
  CHECK_THROWS_AS(curve_csv(nan), ArgumentError);
  CHECK_THROWS_AS(render_curve_svg(std::vector<CurvePoint>{}, {}), ArgumentError);
}

TEST_CASE("curve csv round-trips and matches marker attributes") {
  const std::vector<CurvePoint> c{{1, 0.1, 0.01}, {2, 1.0 / 3.0, 0.02}, {5, 2e-17, 0.0}};
  const auto rows = split_csv(curve_csv(c));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"x", "y", "stderr"});
  const auto markers = elements(render_curve_svg(c, {}), "marker");
  REQUIRE(markers.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(parse_double(rows[i + 1][0]) == c[i].x);
    CHECK(parse_double(rows[i + 1][1]) == c[i].y);
    CHECK(parse_double(rows[i + 1][2]) == *c[i].stderr_value);
    CHECK(markers[i].get<std::string>("<xmlattr>.data-y") == rows[i + 1][1]);
  }
  const std::vector<CurvePoint> plain{{1, 2, {}}};
  CHECK(split_csv(curve_csv(plain))[0] == std::vector<std::string>{"x", "y"});
}

TEST_CASE("learning curve of an iris run has one row per epoch") {
  const auto data = testing::iris();
  const auto norm = apply_normalizer(fit_normalizer(data, NormalizationKind::zscore, true), data);
  Schedule s;
  s.seed = 1;
  const auto result = fit(norm, {10, 10}, s);
  const auto curve = learning_curve(result.trace);
  REQUIRE(curve.size() == 500);
  CHECK(curve.front().x == 1.0);
  CHECK(curve.back().x == 500.0);
  CHECK(split_csv(curve_csv(curve)).size() == 501);
  CHECK(curve[10].y == result.trace.epochs[10].train_error);
}

TEST_CASE("sweep curve uses the standard error of the fold mean") {
  EvalReport a, b;
  a.method.dim = 1;
  a.fold_errors = {10, 20, 30, 40};
  b.method.dim = 2;
  b.fold_errors = {5, 5, 5, 5};
  summarize(a);
  summarize(b);
  const std::vector<EvalReport> reports{a, b};
  const auto curve = sweep_curve(reports);
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].x == 1.0);
  CHECK(curve[0].y == 25.0);
  CHECK(*curve[0].stderr_value == doctest::Approx(std::sqrt(125.0) / 2.0));
  CHECK(*curve[1].stderr_value == 0.0);
}

TEST_CASE("format_exact round-trips") {
  RngStream rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-1e6, 1e6) * std::pow(10.0, double(rng.below(40)) - 20.0);
    CHECK(parse_double(format_exact(v)) == v);
  }
  CHECK(format_exact(0.1) == "0.1");
  CHECK(format_exact(3.0) == "3");
}
