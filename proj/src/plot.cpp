#include "stga/plot.hpp"

#include <array>
#include <cstdio>

namespace stga {

namespace {

constexpr std::array<const char*, 8> kPalette = {
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#f781bf", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

/// y is flipped so larger normalized y plots upward.
std::string points_attr(const std::vector<Vec2>& pts, int size_px) {
  std::string s;
  for (const Vec2& p : pts) {
    if (!s.empty()) s += " ";
    s += fmt(p.x() * size_px) + "," + fmt((1.0 - p.y()) * size_px);
  }
  return s;
}

}  // namespace

std::string render_svg(const std::vector<PlotTrajectory>& trajectories,
                       const std::map<int, Vec2>& obstacles, double lambda, int size_px) {
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size_px) +
         "\" height=\"" + std::to_string(size_px) + "\" viewBox=\"0 0 " +
         std::to_string(size_px) + " " + std::to_string(size_px) + "\">\n";
  svg += "<rect width=\"" + std::to_string(size_px) + "\" height=\"" + std::to_string(size_px) +
         "\" fill=\"#ffffff\"/>\n";

  for (const auto& [id, pos] : obstacles) {
    svg += "<circle cx=\"" + fmt(pos.x() * size_px) + "\" cy=\"" +
           fmt((1.0 - pos.y()) * size_px) + "\" r=\"" + fmt(lambda * size_px) +
           "\" fill=\"#fdd\" fill-opacity=\"0.5\" stroke=\"#c00\" stroke-width=\"1\"/>\n";
  }

  std::size_t color_index = 0;
  for (const PlotTrajectory& tr : trajectories) {
    const char* color = kPalette[color_index++ % kPalette.size()];
    svg += "<polyline points=\"" + points_attr(tr.observed, size_px) +
           "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"2\"/>\n";
    svg += "<polyline points=\"" + points_attr(tr.gt_future, size_px) +
           "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
    svg += "<polyline points=\"" + points_attr(tr.predicted, size_px) +
           "\" fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace stga
