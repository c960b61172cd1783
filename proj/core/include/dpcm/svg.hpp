#ifndef DPCM_SVG_HPP
#define DPCM_SVG_HPP

#include <string>
#include <vector>

namespace dpcm {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;  // equal length; non-finite points are skipped
};

/// Self-contained deterministic SVG line plot: linear axes with tick labels,
/// one polyline per series, legend. Byte-identical output for identical input.
/// Throws std::invalid_argument when no series contains a finite point or a
/// series has mismatched x/y lengths; std::runtime_error on I/O failure.
void emit_svg_plot(const std::vector<PlotSeries>& series,
                   const std::string& title, const std::string& x_label,
                   const std::string& y_label, const std::string& path);

}  // namespace dpcm

#endif
