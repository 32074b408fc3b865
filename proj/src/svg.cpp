#include "advfeat/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace advfeat {

namespace {

constexpr int kCanvas = 480;
constexpr int kMargin = 40;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::string decision_map_svg(const DecisionMap& map) {
  const int res = map.resolution;
  const double plot = kCanvas - 2.0 * kMargin;
  const double cell = plot / res;
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvas
     << "\" height=\"" << kCanvas << "\">\n";
  os << "<rect width=\"" << kCanvas << "\" height=\"" << kCanvas
     << "\" fill=\"white\"/>\n";

  auto to_px = [&](double alpha, double beta) {
    double fx = (alpha + map.half_width) / (2.0 * map.half_width);
    double fy = (beta + map.half_width) / (2.0 * map.half_width);
    return std::pair<double, double>(kMargin + clamp01(fx) * plot,
                                     kCanvas - kMargin - clamp01(fy) * plot);
  };

  for (int i = 0; i < res; ++i) {
    for (int j = 0; j < res; ++j) {
      const char* fill = map.signs(i, j) > 0 ? "#aec7e8" : "#ffbb78";
      auto [px, py] = to_px(map.alphas[i], map.betas[j]);
      os << "<rect x=\"" << px - cell / 2 << "\" y=\"" << py - cell / 2
         << "\" width=\"" << cell + 0.5 << "\" height=\"" << cell + 0.5
         << "\" fill=\"" << fill << "\"/>\n";
    }
  }

  for (const auto& pt : map.points) {
    auto [px, py] = to_px(pt[0], pt[1]);
    if (pt[2] > 0) {
      os << "<circle cx=\"" << px << "\" cy=\"" << py
         << "\" r=\"3\" fill=\"none\" stroke=\"#1f77b4\" "
            "stroke-width=\"1.5\"/>\n";
    } else {
      os << "<path d=\"M" << px - 3 << ' ' << py - 3 << " L" << px + 3 << ' '
         << py + 3 << " M" << px - 3 << ' ' << py + 3 << " L" << px + 3 << ' '
         << py - 3 << "\" stroke=\"#ff7f0e\" stroke-width=\"1.5\"/>\n";
    }
  }

  os << "<text x=\"" << kCanvas - kMargin + 6 << "\" y=\""
     << kCanvas - kMargin + 4 << "\" font-size=\"14\">v</text>\n";
  os << "<text x=\"" << kMargin - 4 << "\" y=\"" << kMargin - 8
     << "\" font-size=\"14\">u</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string sweep_curves_svg(const std::vector<SweepSeries>& series,
                             const std::string& x_label,
                             const std::string& y_label) {
  double xmin = 0.0, xmax = 1.0;
  bool first = true;
  for (const auto& s : series) {
    for (double x : s.xs) {
      if (first) {
        xmin = xmax = x;
        first = false;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  const double plot = kCanvas - 2.0 * kMargin;

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvas
     << "\" height=\"" << kCanvas << "\">\n";
  os << "<rect width=\"" << kCanvas << "\" height=\"" << kCanvas
     << "\" fill=\"white\"/>\n";
  os << "<line x1=\"" << kMargin << "\" y1=\"" << kCanvas - kMargin
     << "\" x2=\"" << kCanvas - kMargin << "\" y2=\"" << kCanvas - kMargin
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kMargin << "\" y1=\"" << kCanvas - kMargin
     << "\" x2=\"" << kMargin << "\" y2=\"" << kMargin
     << "\" stroke=\"black\"/>\n";

  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"";
    if (s.dashed) os << " stroke-dasharray=\"6,4\"";
    os << " points=\"";
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      double fx = (s.xs[i] - xmin) / (xmax - xmin);
      double fy = clamp01(s.ys[i]);
      os << kMargin + fx * plot << ',' << kCanvas - kMargin - fy * plot << ' ';
    }
    os << "\"/>\n";
  }

  int legend_y = kMargin;
  for (const auto& s : series) {
    os << "<line x1=\"" << kCanvas - kMargin - 120 << "\" y1=\"" << legend_y
       << "\" x2=\"" << kCanvas - kMargin - 90 << "\" y2=\"" << legend_y
       << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
    if (s.dashed) os << " stroke-dasharray=\"6,4\"";
    os << "/>\n<text x=\"" << kCanvas - kMargin - 84 << "\" y=\""
       << legend_y + 4 << "\" font-size=\"12\">" << s.label << "</text>\n";
    legend_y += 18;
  }

  os << "<text x=\"" << kCanvas / 2 << "\" y=\"" << kCanvas - 8
     << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label
     << "</text>\n";
  os << "<text x=\"12\" y=\"" << kCanvas / 2
     << "\" font-size=\"13\" transform=\"rotate(-90 12 " << kCanvas / 2
     << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace advfeat
