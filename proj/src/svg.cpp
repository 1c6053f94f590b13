#include "privae/svg.hpp"

#include "privae/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace privae {

namespace {

constexpr double kLeft = 80, kRight = 170, kTop = 50, kBottom = 70;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

}  // namespace

std::string palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                 "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};
  return colors[i % (sizeof(colors) / sizeof(colors[0]))];
}

std::string render_svg(const SvgPlot& plot) {
  Range rx, ry;
  for (const auto& s : plot.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("svg series '" + s.label + "': x/y size mismatch");
    for (double v : s.x) rx.add(v);
    for (double v : s.y) ry.add(v);
  }
  rx.finish();
  ry.finish();

  const double pw = kSvgWidth - kLeft - kRight;
  const double ph = kSvgHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto sy = [&](double v) { return kTop + ph - (v - ry.lo) / (ry.hi - ry.lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth << "\" height=\""
     << kSvgHeight << "\" viewBox=\"0 0 " << kSvgWidth << " " << kSvgHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kSvgWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"18\">"
     << escape(plot.title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int t = 0; t <= 5; ++t) {
    const double fx = rx.lo + (rx.hi - rx.lo) * t / 5.0;
    const double fy = ry.lo + (ry.hi - ry.lo) * t / 5.0;
    os << "<line x1=\"" << num(sx(fx)) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(sx(fx))
       << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(sx(fx)) << "\" y=\"" << kTop + ph + 20
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(fx)
       << "</text>\n";
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(sy(fy)) << "\" x2=\"" << kLeft
       << "\" y2=\"" << num(sy(fy)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(sy(fy) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(fy)
       << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kSvgHeight - 20
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << escape(plot.x_label) << "</text>\n";
  os << "<text x=\"20\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"14\" transform=\"rotate(-90 20 "
     << kTop + ph / 2 << ")\">" << escape(plot.y_label) << "</text>\n";

  for (const auto& s : plot.series) {
    if (s.line) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" opacity=\""
         << s.opacity << "\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << num(sx(s.x[i])) << "," << num(sy(s.y[i])) << " ";
      }
      os << "\"/>\n";
    } else {
      os << "<g fill=\"" << s.color << "\" opacity=\"" << s.opacity << "\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << "<circle cx=\"" << num(sx(s.x[i])) << "\" cy=\"" << num(sy(s.y[i])) << "\" r=\""
           << s.radius << "\"/>\n";
      }
      os << "</g>\n";
    }
  }

  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const double y = kTop + 10 + 20.0 * static_cast<double>(i);
    const double x = kSvgWidth - kRight + 15;
    os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"12\" height=\"12\" fill=\""
       << plot.series[i].color << "\"/>\n";
    os << "<text x=\"" << x + 18 << "\" y=\"" << y + 10
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(plot.series[i].label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_svg(const std::filesystem::path& path, const SvgPlot& plot) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << render_svg(plot);
}

}  // namespace privae
