#include "rcmc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rcmc {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

std::string SvgChart::render() const {
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      double xv = log_x ? std::log10(std::max(s.x[i], 1e-300)) : s.x[i];
      double yv = log_y ? std::log10(std::max(s.y[i], 1e-300)) : s.y[i];
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, yv);
      ymax = std::max(ymax, yv);
    }
  if (!(xmax > xmin)) xmax = xmin + 1;
  if (!(ymax > ymin)) {
    ymax = ymin + 1;
    ymin -= 1;
  }
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double xv) { return ml + (xv - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double yv) { return mt + ph - (yv - ymin) / (ymax - ymin) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
     << "</text>\n";
  os << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw) << "\" height=\""
     << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  const int nticks = 5;
  for (int t = 0; t <= nticks; ++t) {
    double xv = xmin + (xmax - xmin) * t / nticks;
    double yv = ymin + (ymax - ymin) * t / nticks;
    os << "<line x1=\"" << fmt(px(xv)) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(px(xv)) << "\" y2=\""
       << fmt(mt + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(mt + ph + 20)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_tick(log_x ? std::pow(10.0, xv) : xv)
       << "</text>\n";
    os << "<line x1=\"" << fmt(ml - 5) << "\" y1=\"" << fmt(py(yv)) << "\" x2=\"" << fmt(ml) << "\" y2=\""
       << fmt(py(yv)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(py(yv) + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_tick(log_y ? std::pow(10.0, yv) : yv)
       << "</text>\n";
  }
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 8 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << height / 2 << ")\">" << y_label << "</text>\n";

  int legend_y = static_cast<int>(mt) + 14;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      double xv = log_x ? std::log10(std::max(s.x[i], 1e-300)) : s.x[i];
      double yv = log_y ? std::log10(std::max(s.y[i], 1e-300)) : s.y[i];
      os << fmt(px(xv)) << "," << fmt(py(yv)) << " ";
    }
    os << "\"/>\n";
    os << "<line x1=\"" << fmt(ml + pw - 130) << "\" y1=\"" << legend_y - 4 << "\" x2=\"" << fmt(ml + pw - 110)
       << "\" y2=\"" << legend_y - 4 << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fmt(ml + pw - 105) << "\" y=\"" << legend_y << "\" font-size=\"11\">" << s.label
       << "</text>\n";
    legend_y += 16;
  }
  os << "</svg>\n";
  return os.str();
}

void SvgChart::save(const std::string& path) const {
  std::ofstream ofs(path);
  if (!ofs) throw std::runtime_error("cannot write " + path);
  ofs << render();
}

}  // namespace rcmc
