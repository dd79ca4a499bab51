#include "emt/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace emt {

namespace {

constexpr double width = 640, height = 420;
constexpr double left = 70, right = 160, top = 40, bottom = 50;

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fixed(double v) {
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

bool usable(double x, double y) { return std::isfinite(x) && std::isfinite(y) && x > 0.0 && y > 0.0; }

}  // namespace

std::string render_svg(const LogLogPlot& plot) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : plot.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      xlo = std::min(xlo, std::log10(s.x[i]));
      xhi = std::max(xhi, std::log10(s.x[i]));
      ylo = std::min(ylo, std::log10(s.y[i]));
      yhi = std::max(yhi, std::log10(s.y[i]));
    }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  xlo = std::floor(xlo), xhi = std::max(std::ceil(xhi), xlo + 1);
  ylo = std::floor(ylo), yhi = std::max(std::ceil(yhi), ylo + 1);

  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double lx) { return left + (lx - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double ly) { return top + (yhi - ly) / (yhi - ylo) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(plot.title) << "</text>\n";
  out << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw) << "\" height=\""
      << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Decade ticks, thinned to at most ~8 labels per axis.
  const int xstep = std::max(1, static_cast<int>(std::ceil((xhi - xlo) / 8)));
  for (int d = static_cast<int>(xlo); d <= static_cast<int>(xhi); d += xstep) {
    const double x = px(d);
    out << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(top) << "\" x2=\"" << fixed(x) << "\" y2=\""
        << fixed(top + ph) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(top + ph + 16) << "\" text-anchor=\"middle\">1e" << d
        << "</text>\n";
  }
  const int ystep = std::max(1, static_cast<int>(std::ceil((yhi - ylo) / 8)));
  for (int d = static_cast<int>(ylo); d <= static_cast<int>(yhi); d += ystep) {
    const double y = py(d);
    out << "<line x1=\"" << fixed(left) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(left + pw) << "\" y2=\""
        << fixed(y) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(y + 4) << "\" text-anchor=\"end\">1e" << d
        << "</text>\n";
  }
  out << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(height - 12) << "\" text-anchor=\"middle\">"
      << escape(plot.x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fixed(top + ph / 2) << ")\">" << escape(plot.y_label) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* colour = palette[k % (sizeof palette / sizeof *palette)];
    std::string points;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      if (!points.empty()) points += ' ';
      points += fixed(px(std::log10(s.x[i]))) + "," + fixed(py(std::log10(s.y[i])));
    }
    if (!points.empty())
      out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"" << points
          << "\"/>\n";
    const double ly = top + 14 + 16 * static_cast<double>(k);
    out << "<line x1=\"" << fixed(left + pw + 10) << "\" y1=\"" << fixed(ly - 4) << "\" x2=\"" << fixed(left + pw + 30)
        << "\" y2=\"" << fixed(ly - 4) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fixed(left + pw + 34) << "\" y=\"" << fixed(ly) << "\">" << escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace emt
