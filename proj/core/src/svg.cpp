#include "recall/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "recall/csv.hpp"

namespace recall {
namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string render_line_plot(const std::vector<SvgSeries>& series,
                             const SvgPlotOptions& options) {
  if (series.empty()) throw std::invalid_argument("render_line_plot: no series");
  const double ml = 64, mr = 20, mt = 36, mb = 48;
  const double pw = options.width - ml - mr, ph = options.height - mt - mb;

  auto tx = [&](double v) { return options.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return options.log_y ? std::log10(v) : v; };

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("render_line_plot: x/y size mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (options.log_x && s.x[i] <= 0.0) continue;
      if (options.log_y && s.y[i] <= 0.0) continue;
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  }
  if (!(xmin < xmax)) xmax = xmin + 1.0;
  if (!(ymin < ymax)) ymax = ymin + 1.0;
  double xpad = 0.03 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double v) { return mt + ph - (ty(v) - ymin) / (ymax - ymin) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
      << "\" height=\"" << options.height << "\" viewBox=\"0 0 " << options.width
      << ' ' << options.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << options.width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << options.title << "</text>\n";
  if (!options.annotation.empty())
    svg << "<text x=\"" << options.width - mr << "\" y=\"" << mt + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
        << "fill=\"#444\">" << options.annotation << "</text>\n";

  // axes
  svg << "<polyline fill=\"none\" stroke=\"black\" points=\"" << ml << ',' << mt
      << ' ' << ml << ',' << mt + ph << ' ' << ml + pw << ',' << mt + ph
      << "\"/>\n";
  // ticks
  const int n_ticks = 5;
  for (int i = 0; i <= n_ticks; ++i) {
    double fx = xmin + (xmax - xmin) * i / n_ticks;
    double fy = ymin + (ymax - ymin) * i / n_ticks;
    double sx = ml + pw * i / n_ticks;
    double sy = mt + ph - ph * i / n_ticks;
    double vx = options.log_x ? std::pow(10.0, fx) : fx;
    double vy = options.log_y ? std::pow(10.0, fy) : fy;
    svg << "<line x1=\"" << sx << "\" y1=\"" << mt + ph << "\" x2=\"" << sx
        << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << sx << "\" y=\"" << mt + ph + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << fmt(vx) << "</text>\n";
    svg << "<line x1=\"" << ml - 4 << "\" y1=\"" << sy << "\" x2=\"" << ml
        << "\" y2=\"" << sy << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 6 << "\" y=\"" << sy + 3
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << fmt(vy) << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << options.height - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << options.x_label << "</text>\n";
  svg << "<text x=\"14\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 14 " << mt + ph / 2 << ")\">" << options.y_label
      << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (options.log_x && s.x[i] <= 0.0) continue;
      if (options.log_y && s.y[i] <= 0.0) continue;
      svg << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
    }
    svg << "\"/>\n";
    double lx = ml + 10;
    double lyy = mt + 14 + 14.0 * static_cast<double>(si);
    svg << "<line x1=\"" << lx << "\" y1=\"" << lyy - 4 << "\" x2=\"" << lx + 18
        << "\" y2=\"" << lyy - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << lx + 24 << "\" y=\"" << lyy
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_line_plot(const std::filesystem::path& path,
                     const std::vector<SvgSeries>& series,
                     const SvgPlotOptions& options) {
  write_file_atomic(path, render_line_plot(series, options));
}

}  // namespace recall
