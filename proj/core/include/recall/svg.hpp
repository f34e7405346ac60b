#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace recall {

// Minimal static line plots: polyline axes, ticks, legend, optional log
// scales and a free-form annotation. CSVs are the canonical outputs; these
// are diagnostic companions.
struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};

struct SvgPlotOptions {
  std::string title;
  std::string x_label, y_label;
  bool log_x = false;
  bool log_y = false;
  std::string annotation;  // drawn top-right under the title
  int width = 640;
  int height = 440;
};

std::string render_line_plot(const std::vector<SvgSeries>& series,
                             const SvgPlotOptions& options);

void write_line_plot(const std::filesystem::path& path,
                     const std::vector<SvgSeries>& series,
                     const SvgPlotOptions& options);

}  // namespace recall
