#pragma once

#include <map>
#include <string>
#include <vector>

#include "stga/types.hpp"

namespace stga {

/// One pedestrian's plotted tracks, all in normalized [0,1] coordinates.
struct PlotTrajectory {
  int ped_id = 0;
  std::vector<Vec2> observed;
  std::vector<Vec2> gt_future;
  std::vector<Vec2> predicted;
};

/// Renders observed (solid), ground-truth future (dashed) and predicted
/// (colored) polylines -- exactly three per trajectory -- plus one circle of
/// radius lambda per obstacle. Output bytes are deterministic for equal
/// inputs.
std::string render_svg(const std::vector<PlotTrajectory>& trajectories,
                       const std::map<int, Vec2>& obstacles, double lambda, int size_px = 800);

}  // namespace stga
