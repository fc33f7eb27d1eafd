#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace benthic {

/// "%.10g" formatting, locale-independent enough for CSV and SVG.
std::string fmt(double v);

/// Writes `header` and rows of numbers; each row must match the header's width.
void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Writes `contents` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& contents);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // draw a circle at each point besides the polyline
};

enum class PlotKind { Lines, Bars };

struct PlotStyle {
  PlotKind kind = PlotKind::Lines;
  std::string title;
  std::string x_label = "t (h)";
  std::string y_label = "X";
  int width = 640;
  int height = 420;
};

/// Standalone SVG. Lines: a polyline per series. Bars: series[0] gives
/// bin centers in x and heights in y, drawn as one rect per bin.
/// Throws std::domain_error on an empty series list or an empty series.
std::string render_plot(const std::vector<PlotSeries>& series, const PlotStyle& style);
void emit_plot(const std::vector<PlotSeries>& series, const PlotStyle& style, const std::filesystem::path& path);

}  // namespace benthic
