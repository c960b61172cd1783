#include "dpcm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dpcm {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 440;
constexpr int kMarginL = 70;
constexpr int kMarginR = 20;
constexpr int kMarginT = 40;
constexpr int kMarginB = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void emit_svg_plot(const std::vector<PlotSeries>& series,
                   const std::string& title, const std::string& x_label,
                   const std::string& y_label, const std::string& path) {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool any = false;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) {
      throw std::invalid_argument("series \"" + s.label +
                                  "\" has mismatched x/y lengths");
    }
    for (std::size_t p = 0; p < s.x.size(); ++p) {
      if (!std::isfinite(s.x[p]) || !std::isfinite(s.y[p])) continue;
      if (!any) {
        xmin = xmax = s.x[p];
        ymin = ymax = s.y[p];
        any = true;
      } else {
        xmin = std::min(xmin, s.x[p]);
        xmax = std::max(xmax, s.x[p]);
        ymin = std::min(ymin, s.y[p]);
        ymax = std::max(ymax, s.y[p]);
      }
    }
  }
  if (!any) {
    throw std::invalid_argument("no finite data point in any plot series");
  }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }

  const double pw = kWidth - kMarginL - kMarginR;
  const double ph = kHeight - kMarginT - kMarginB;
  auto px = [&](double x) {
    return kMarginL + pw * (x - xmin) / (xmax - xmin);
  };
  auto py = [&](double y) {
    return kMarginT + ph * (1.0 - (y - ymin) / (ymax - ymin));
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << escape(title) << "</text>\n";

  // axes box + ticks
  out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\""
      << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  constexpr int kTicks = 5;
  for (int t = 0; t <= kTicks; ++t) {
    const double fx = xmin + (xmax - xmin) * t / kTicks;
    const double fy = ymin + (ymax - ymin) * t / kTicks;
    out << "<line x1=\"" << num(px(fx)) << "\" y1=\"" << kHeight - kMarginB
        << "\" x2=\"" << num(px(fx)) << "\" y2=\""
        << kHeight - kMarginB + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(px(fx)) << "\" y=\"" << kHeight - kMarginB + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << num(fx) << "</text>\n";
    out << "<line x1=\"" << kMarginL - 5 << "\" y1=\"" << num(py(fy))
        << "\" x2=\"" << kMarginL << "\" y2=\"" << num(py(fy))
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kMarginL - 8 << "\" y=\"" << num(py(fy) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << num(fy) << "</text>\n";
  }
  out << "<text x=\"" << kMarginL + pw / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << escape(x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << num(kMarginT + ph / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 "
      << num(kMarginT + ph / 2) << ")\">" << escape(y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
    std::string pts;
    for (std::size_t p = 0; p < series[s].x.size(); ++p) {
      if (!std::isfinite(series[s].x[p]) || !std::isfinite(series[s].y[p])) {
        continue;
      }
      if (!pts.empty()) pts += ' ';
      pts += num(px(series[s].x[p])) + "," + num(py(series[s].y[p]));
    }
    if (pts.empty()) continue;
    out << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
    // legend entry
    const double ly = kMarginT + 14.0 + 16.0 * static_cast<double>(s);
    out << "<line x1=\"" << kMarginL + pw - 110 << "\" y1=\"" << num(ly - 4)
        << "\" x2=\"" << kMarginL + pw - 90 << "\" y2=\"" << num(ly - 4)
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << kMarginL + pw - 84 << "\" y=\"" << num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(series[s].label) << "</text>\n";
  }
  out << "</svg>\n";
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace dpcm
