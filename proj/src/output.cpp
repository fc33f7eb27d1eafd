#include "benthic/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace benthic {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 150;
constexpr int kMarginTop = 36;
constexpr int kMarginBottom = 52;

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range pad(double lo, double hi) {
  if (!(hi > lo)) {
    const double d = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    return {lo - d, hi + d};
  }
  return {lo, hi};
}

}  // namespace

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw std::invalid_argument("write_csv: row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
    out << '\n';
  }
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string render_plot(const std::vector<PlotSeries>& series, const PlotStyle& style) {
  if (series.empty()) throw std::domain_error("render_plot: no series");
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size()) throw std::domain_error("render_plot: empty or ragged series");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (!std::isfinite(xlo)) throw std::domain_error("render_plot: no finite points");

  double bar_width = 0.0;
  if (style.kind == PlotKind::Bars) {
    const auto& xs = series.front().x;
    bar_width = xs.size() > 1 ? (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1) : 1.0;
    xlo -= bar_width / 2;
    xhi += bar_width / 2;
    ylo = std::min(ylo, 0.0);
  }
  const Range xr = pad(xlo, xhi);
  const Range yr = pad(ylo, yhi);

  const double x0 = kMarginLeft, x1 = style.width - kMarginRight;
  const double y0 = style.height - kMarginBottom, y1 = kMarginTop;
  auto sx = [&](double v) { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
  auto sy = [&](double v) { return y0 + (v - yr.lo) / (yr.hi - yr.lo) * (y1 - y0); };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\"" << style.height
    << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  if (!style.title.empty()) {
    o << "<text x=\"" << px((x0 + x1) / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(style.title) << "</text>\n";
  }

  // axes and ticks
  o << "<g stroke=\"#000\" stroke-width=\"1\">\n"
    << "<line x1=\"" << px(x0) << "\" y1=\"" << px(y0) << "\" x2=\"" << px(x1) << "\" y2=\"" << px(y0) << "\"/>\n"
    << "<line x1=\"" << px(x0) << "\" y1=\"" << px(y0) << "\" x2=\"" << px(x0) << "\" y2=\"" << px(y1) << "\"/>\n";
  constexpr int kTicks = 5;
  for (int k = 0; k <= kTicks; ++k) {
    const double fx = x0 + (x1 - x0) * k / kTicks;
    const double fy = y0 + (y1 - y0) * k / kTicks;
    o << "<line x1=\"" << px(fx) << "\" y1=\"" << px(y0) << "\" x2=\"" << px(fx) << "\" y2=\"" << px(y0 + 5) << "\"/>\n"
      << "<line x1=\"" << px(x0 - 5) << "\" y1=\"" << px(fy) << "\" x2=\"" << px(x0) << "\" y2=\"" << px(fy) << "\"/>\n";
  }
  o << "</g>\n<g fill=\"#000\">\n";
  for (int k = 0; k <= kTicks; ++k) {
    const double vx = xr.lo + (xr.hi - xr.lo) * k / kTicks;
    const double vy = yr.lo + (yr.hi - yr.lo) * k / kTicks;
    char lx[32], ly[32];
    std::snprintf(lx, sizeof lx, "%.3g", vx);
    std::snprintf(ly, sizeof ly, "%.3g", vy);
    o << "<text x=\"" << px(x0 + (x1 - x0) * k / kTicks) << "\" y=\"" << px(y0 + 18)
      << "\" text-anchor=\"middle\">" << lx << "</text>\n"
      << "<text x=\"" << px(x0 - 8) << "\" y=\"" << px(y0 + (y1 - y0) * k / kTicks + 4)
      << "\" text-anchor=\"end\">" << ly << "</text>\n";
  }
  o << "<text x=\"" << px((x0 + x1) / 2) << "\" y=\"" << px(style.height - 12.0) << "\" text-anchor=\"middle\">"
    << escape(style.x_label) << "</text>\n"
    << "<text x=\"16\" y=\"" << px((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << px((y0 + y1) / 2) << ")\">" << escape(style.y_label) << "</text>\n</g>\n";

  // data
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    if (style.kind == PlotKind::Bars && k == 0) {
      o << "<g fill=\"" << color << "\" stroke=\"#fff\" stroke-width=\"0.5\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double left = sx(s.x[i] - bar_width / 2), right = sx(s.x[i] + bar_width / 2);
        const double top = sy(std::max(s.y[i], 0.0)), base = sy(std::max(yr.lo, 0.0));
        o << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(right - left)
          << "\" height=\"" << px(base - top) << "\"/>\n";
      }
      o << "</g>\n";
      continue;
    }
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << (first ? "" : " ") << px(sx(s.x[i])) << ',' << px(sy(s.y[i]));
      first = false;
    }
    o << "\"/>\n";
    if (s.markers) {
      o << "<g fill=\"" << color << "\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        o << "<circle cx=\"" << px(sx(s.x[i])) << "\" cy=\"" << px(sy(s.y[i])) << "\" r=\"3\"/>\n";
      }
      o << "</g>\n";
    }
  }

  // legend
  o << "<g>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double ly = kMarginTop + 10.0 + 18.0 * static_cast<double>(k);
    const double lx = x1 + 14.0;
    o << "<line x1=\"" << px(lx) << "\" y1=\"" << px(ly) << "\" x2=\"" << px(lx + 22) << "\" y2=\"" << px(ly)
      << "\" stroke=\"" << kPalette[k % std::size(kPalette)] << "\" stroke-width=\""
      << (style.kind == PlotKind::Bars && k == 0 ? "8" : "2") << "\"/>\n"
      << "<text x=\"" << px(lx + 28) << "\" y=\"" << px(ly + 4) << "\">" << escape(series[k].label) << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

void emit_plot(const std::vector<PlotSeries>& series, const PlotStyle& style, const std::filesystem::path& path) {
  write_file(path, render_plot(series, style));
}

}  // namespace benthic
