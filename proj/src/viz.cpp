#include "crsom/viz.hpp"

#include "crsom/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <tuple>

namespace crsom {

namespace {

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr std::array<MarkerShape, 6> kShapes = {MarkerShape::circle,  MarkerShape::square,        MarkerShape::triangle_up,
                                                MarkerShape::diamond, MarkerShape::triangle_down, MarkerShape::cross};

constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

std::string escape_xml(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) { return fmt::format("{:.2f}", v); }

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double pix_lo = 0.0;
  double pix_hi = 1.0;

  double map(double v) const { return pix_lo + (v - lo) / (hi - lo) * (pix_hi - pix_lo); }
};

// Data range with 5% padding; a zero-width range is widened to +-1.
Axis padded_axis(double lo, double hi, double pix_lo, double pix_hi) {
  if (hi - lo <= 0.0) {
    lo -= 1.0;
    hi += 1.0;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, pix_lo, pix_hi};
}

std::string marker_shape(const ClassStyle& style, double cx, double cy, double r, std::string_view attrs) {
  const std::string paint = fmt::format("fill=\"{}\" fill-opacity=\"0.8\" stroke=\"#222222\" stroke-width=\"0.6\"", style.color);
  switch (style.shape) {
    case MarkerShape::circle:
      return fmt::format("<circle {} cx=\"{}\" cy=\"{}\" r=\"{}\" {}/>", attrs, px(cx), px(cy), px(r), paint);
    case MarkerShape::square:
      return fmt::format("<rect {} x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" {}/>", attrs, px(cx - r), px(cy - r),
                         px(2 * r), px(2 * r), paint);
    case MarkerShape::triangle_up:
      return fmt::format("<path {} d=\"M{} {} L{} {} L{} {} Z\" {}/>", attrs, px(cx), px(cy - r), px(cx + r), px(cy + r),
                         px(cx - r), px(cy + r), paint);
    case MarkerShape::triangle_down:
      return fmt::format("<path {} d=\"M{} {} L{} {} L{} {} Z\" {}/>", attrs, px(cx), px(cy + r), px(cx + r), px(cy - r),
                         px(cx - r), px(cy - r), paint);
    case MarkerShape::diamond:
      return fmt::format("<path {} d=\"M{} {} L{} {} L{} {} L{} {} Z\" {}/>", attrs, px(cx), px(cy - r), px(cx + r), px(cy),
                         px(cx), px(cy + r), px(cx - r), px(cy), paint);
    case MarkerShape::cross: {
      const double a = r / 3.0;
      std::string d = fmt::format("M{} {}", px(cx - a), px(cy - r));
      const std::array<std::pair<double, double>, 11> rest = {{{a, -r}, {a, -a}, {r, -a}, {r, a}, {a, a}, {a, r},
                                                                {-a, r}, {-a, a}, {-r, a}, {-r, -a}, {-a, -a}}};
      for (const auto& [dx, dy] : rest) d += fmt::format(" L{} {}", px(cx + dx), px(cy + dy));
      return fmt::format("<path {} d=\"{} Z\" {}/>", attrs, d, paint);
    }
  }
  return {};
}

std::string open_svg(const FigureSpec& spec) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n",
      spec.width, spec.height);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", spec.width, spec.height);
  if (!spec.title.empty())
    out += fmt::format("<text class=\"title\" x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
                       px(kLeft + (spec.width - kLeft - kRight) / 2.0), escape_xml(spec.title));
  return out;
}

// Tick labels only at the data extremes, so every number printed is a data value.
std::string frame_and_labels(const FigureSpec& spec, const Axis& x, const Axis& y, double x_lo, double x_hi, double y_lo,
                             double y_hi) {
  const double right = spec.width - kRight;
  const double bottom = spec.height - kBottom;
  std::string out = "<g class=\"axes\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000000\"/>\n", px(kLeft),
                     px(kTop), px(right - kLeft), px(bottom - kTop));
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px(x.map(x_lo)), px(bottom + 15), format_exact(x_lo));
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px(x.map(x_hi)), px(bottom + 15), format_exact(x_hi));
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", px(kLeft - 5), px(y.map(y_lo) + 4), format_exact(y_lo));
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", px(kLeft - 5), px(y.map(y_hi) + 4), format_exact(y_hi));
  out += fmt::format("<text class=\"xlabel\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
                     px((kLeft + right) / 2.0), px(bottom + 38), escape_xml(spec.x_label));
  out += fmt::format(
      "<text class=\"ylabel\" x=\"0\" y=\"0\" text-anchor=\"middle\" font-size=\"13\" transform=\"translate({} {}) rotate(-90)\">{}</text>\n",
      px(kLeft - 45), px((kTop + bottom) / 2.0), escape_xml(spec.y_label));
  out += "</g>\n";
  return out;
}

void check_canvas(const FigureSpec& spec) {
  if (spec.width < static_cast<int>(kLeft + kRight) + 50 || spec.height < static_cast<int>(kTop + kBottom) + 50)
    throw ArgumentError(fmt::format("figure canvas {}x{} is too small", spec.width, spec.height));
}

std::filesystem::path companion_path(const std::filesystem::path& path) {
  auto out = path;
  out.replace_extension(".csv");
  if (out == path) throw ArgumentError("figure path must not end in .csv: " + path.string());
  return out;
}

}  // namespace

ClassStyle class_style(std::size_t label) { return {kPalette[label % kPalette.size()], kShapes[label % kShapes.size()]}; }

std::string format_exact(double value) { return fmt::format("{}", value); }

std::string scatter_csv(const Projection2D& projection) {
  std::string out = "u,v,label\n";
  for (const auto& p : projection.points) out += fmt::format("{},{},{}\n", format_exact(p.u), format_exact(p.v), p.label);
  return out;
}

std::string render_scatter_svg(const Projection2D& projection, const FigureSpec& spec) {
  if (projection.points.empty()) throw ArgumentError("cannot draw an empty projection");
  check_canvas(spec);
  for (const auto& p : projection.points) {
    if (!std::isfinite(p.u) || !std::isfinite(p.v)) throw ArgumentError("projection contains a non-finite coordinate");
  }
  const bool on_grid = projection.source == ProjectionSource::crsom;
  const double right = spec.width - kRight;
  const double bottom = spec.height - kBottom;

  double u_lo = projection.points.front().u, u_hi = u_lo;
  double v_lo = projection.points.front().v, v_hi = v_lo;
  for (const auto& p : projection.points) {
    u_lo = std::min(u_lo, p.u);
    u_hi = std::max(u_hi, p.u);
    v_lo = std::min(v_lo, p.v);
    v_hi = std::max(v_hi, p.v);
  }

  Axis x, y;
  if (on_grid) {
    // Grid extent is not stored in the projection; the occupied cells bound it.
    x = {-0.5, std::max(u_hi, 0.0) + 0.5, kLeft, right};
    y = {-0.5, std::max(v_hi, 0.0) + 0.5, bottom, kTop};
  } else {
    x = padded_axis(u_lo, u_hi, kLeft, right);
    y = padded_axis(v_lo, v_hi, bottom, kTop);
  }

  std::string out = open_svg(spec);
  out += frame_and_labels(spec, x, y, u_lo, u_hi, v_lo, v_hi);
  out += "<g class=\"markers\">\n";
  if (on_grid) {
    std::map<std::tuple<double, double, std::size_t>, std::size_t> groups;
    for (const auto& p : projection.points) ++groups[{p.u, p.v, p.label}];
    std::size_t most = 0;
    for (const auto& [key, count] : groups) most = std::max(most, count);
    std::vector<std::pair<std::tuple<double, double, std::size_t>, std::size_t>> order(groups.begin(), groups.end());
    // Larger markers first so that smaller ones sharing a cell stay visible.
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    const double cell = std::min(std::abs(x.map(1.0) - x.map(0.0)), std::abs(y.map(1.0) - y.map(0.0)));
    for (const auto& [key, count] : order) {
      const auto& [u, v, label] = key;
      const double r = std::max(1.5, 0.48 * cell * std::sqrt(static_cast<double>(count) / static_cast<double>(most)));
      const std::string attrs = fmt::format("class=\"marker\" data-label=\"{}\" data-u=\"{}\" data-v=\"{}\" data-count=\"{}\"",
                                            label, format_exact(u), format_exact(v), count);
      out += marker_shape(class_style(label), x.map(u), y.map(v), r, attrs) + "\n";
    }
  } else {
    for (const auto& p : projection.points) {
      const std::string attrs = fmt::format("class=\"marker\" data-label=\"{}\" data-u=\"{}\" data-v=\"{}\"", p.label,
                                            format_exact(p.u), format_exact(p.v));
      out += marker_shape(class_style(p.label), x.map(p.u), y.map(p.v), 4.0, attrs) + "\n";
    }
  }
  out += "</g>\n";

  std::size_t classes = projection.num_classes;
  for (const auto& p : projection.points) classes = std::max(classes, p.label + 1);
  out += "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t k = 0; k < classes; ++k) {
    const double ly = kTop + 10.0 + 16.0 * static_cast<double>(k);
    const double lx = right + 20.0;
    out += marker_shape(class_style(k), lx, ly, 5.0, fmt::format("class=\"legend-marker\" data-label=\"{}\"", k)) + "\n";
    const std::string name = k < projection.class_names.size() ? projection.class_names[k] : fmt::format("class {}", k);
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", px(lx + 10), px(ly + 4), escape_xml(name));
  }
  out += "</g>\n</svg>\n";
  return out;
}

void export_scatter(const Projection2D& projection, const FigureSpec& spec, const std::filesystem::path& path) {
  const auto csv = companion_path(path);
  const std::string svg = render_scatter_svg(projection, spec);
  write_text_file(path, svg);
  write_text_file(csv, scatter_csv(projection));
}

namespace {

void check_series(std::span<const CurvePoint> series) {
  if (series.empty()) throw ArgumentError("cannot draw an empty series");
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& p = series[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || (p.stderr_value && !std::isfinite(*p.stderr_value)))
      throw ArgumentError(fmt::format("series point {} is not finite", i));
    if (i > 0 && !(p.x > series[i - 1].x))
      throw ArgumentError(fmt::format("series x must be strictly increasing (point {}: {} after {})", i, p.x, series[i - 1].x));
  }
}

}  // namespace

std::string curve_csv(std::span<const CurvePoint> series) {
  check_series(series);
  const bool with_err = std::any_of(series.begin(), series.end(), [](const CurvePoint& p) { return p.stderr_value.has_value(); });
  std::string out = with_err ? "x,y,stderr\n" : "x,y\n";
  for (const auto& p : series) {
    out += format_exact(p.x) + "," + format_exact(p.y);
    if (with_err) out += "," + (p.stderr_value ? format_exact(*p.stderr_value) : std::string());
    out += "\n";
  }
  return out;
}

std::string render_curve_svg(std::span<const CurvePoint> series, const FigureSpec& spec) {
  check_series(series);
  check_canvas(spec);
  const double right = spec.width - kRight;
  const double bottom = spec.height - kBottom;

  double y_lo = series.front().y, y_hi = y_lo;
  for (const auto& p : series) {
    const double e = p.stderr_value.value_or(0.0);
    y_lo = std::min(y_lo, p.y - std::abs(e));
    y_hi = std::max(y_hi, p.y + std::abs(e));
  }
  const Axis x = padded_axis(series.front().x, series.back().x, kLeft, right);
  const Axis y = padded_axis(y_lo, y_hi, bottom, kTop);

  double data_lo = series.front().y, data_hi = data_lo;
  for (const auto& p : series) {
    data_lo = std::min(data_lo, p.y);
    data_hi = std::max(data_hi, p.y);
  }

  std::string out = open_svg(spec);
  out += frame_and_labels(spec, x, y, series.front().x, series.back().x, data_lo, data_hi);

  std::string points;
  for (const auto& p : series) {
    if (!points.empty()) points += ' ';
    points += px(x.map(p.x)) + "," + px(y.map(p.y));
  }
  out += fmt::format("<polyline class=\"series\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", points,
                     kPalette[0]);

  out += "<g class=\"markers\">\n";
  for (const auto& p : series) {
    const double cx = x.map(p.x);
    const double cy = y.map(p.y);
    std::string attrs = fmt::format("class=\"marker\" data-x=\"{}\" data-y=\"{}\"", format_exact(p.x), format_exact(p.y));
    if (p.stderr_value) {
      attrs += fmt::format(" data-stderr=\"{}\"", format_exact(*p.stderr_value));
      const double e = std::abs(*p.stderr_value);
      out += fmt::format("<path class=\"errorbar\" d=\"M{0} {1} L{0} {2} M{3} {1} L{4} {1} M{3} {2} L{4} {2}\" stroke=\"#444444\" fill=\"none\"/>\n",
                         px(cx), px(y.map(p.y - e)), px(y.map(p.y + e)), px(cx - 3), px(cx + 3));
    }
    out += fmt::format("<circle {} cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"/>\n", attrs, px(cx), px(cy),
                       series.size() > 100 ? "1.20" : "3.00", kPalette[0]);
  }
  out += "</g>\n</svg>\n";
  return out;
}

void export_curve(std::span<const CurvePoint> series, const FigureSpec& spec, const std::filesystem::path& path) {
  const auto csv = companion_path(path);
  const std::string svg = render_curve_svg(series, spec);
  write_text_file(path, svg);
  write_text_file(csv, curve_csv(series));
}

std::vector<CurvePoint> learning_curve(const TrainTrace& trace) {
  std::vector<CurvePoint> out;
  out.reserve(trace.epochs.size());
  for (const auto& e : trace.epochs) out.push_back({static_cast<double>(e.epoch + 1), e.train_error, std::nullopt});
  return out;
}

std::vector<CurvePoint> sweep_curve(std::span<const EvalReport> reports) {
  std::vector<CurvePoint> out;
  out.reserve(reports.size());
  for (const auto& r : reports) {
    const double folds = static_cast<double>(std::max<std::size_t>(r.fold_errors.size(), 1));
    out.push_back({static_cast<double>(r.method.dim), r.mean, r.stddev / std::sqrt(folds)});
  }
  return out;
}

}  // namespace crsom
