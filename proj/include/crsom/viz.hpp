#pragma once

// SVG export for 2-D projections and curves. Every figure is written next to
// a comma-delimited companion file (same stem, .csv) holding the plotted
// numbers; marker elements carry the same strings as data-* attributes.

#include "crsom/core.hpp"
#include "crsom/rrbf.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crsom {

struct EvalReport;

struct FigureSpec {
  std::string title;
  std::string x_label = "u";
  std::string y_label = "v";
  int width = 640;
  int height = 480;
};

enum class MarkerShape { circle, square, triangle_up, diamond, triangle_down, cross };

struct ClassStyle {
  std::string color;  // "#rrggbb"
  MarkerShape shape = MarkerShape::circle;
};

inline constexpr std::size_t kMaxStyledClasses = 26;

// Deterministic by class index; the first kMaxStyledClasses are pairwise distinct.
ClassStyle class_style(std::size_t label);

// Writes path (SVG) and path with extension .csv (u,v,label). CRSOM
// projections are drawn on the integer grid with one marker per occupied
// (cell, class) and radius proportional to sqrt(count).
void export_scatter(const Projection2D& projection, const FigureSpec& spec, const std::filesystem::path& path);
std::string render_scatter_svg(const Projection2D& projection, const FigureSpec& spec);
std::string scatter_csv(const Projection2D& projection);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  std::optional<double> stderr_value;
};

// x must be strictly increasing and all values finite; a single point is allowed.
void export_curve(std::span<const CurvePoint> series, const FigureSpec& spec, const std::filesystem::path& path);
std::string render_curve_svg(std::span<const CurvePoint> series, const FigureSpec& spec);
std::string curve_csv(std::span<const CurvePoint> series);

// Training error (%) per epoch, x = epoch + 1.
std::vector<CurvePoint> learning_curve(const TrainTrace& trace);
// Mean error against target dimension, error bars are sd / sqrt(folds).
std::vector<CurvePoint> sweep_curve(std::span<const EvalReport> reports);

// Shortest decimal text that parses back to the same double.
std::string format_exact(double value);

}  // namespace crsom
