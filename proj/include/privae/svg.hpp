#pragma once

// Minimal 800x600 SVG charts: scatter and line series on shared linear axes.

#include <filesystem>
#include <string>
#include <vector>

namespace privae {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool line = false;     // polyline through the points instead of dots
  double radius = 2.0;   // dot radius for scatter series
  double opacity = 1.0;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
};

inline constexpr int kSvgWidth = 800;
inline constexpr int kSvgHeight = 600;

std::string render_svg(const SvgPlot& plot);
void write_svg(const std::filesystem::path& path, const SvgPlot& plot);

/// Qualitative palette entry i (cycles).
std::string palette(std::size_t i);

}  // namespace privae
