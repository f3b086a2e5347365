#pragma once

#include <vector>

#include "stga/types.hpp"

namespace stga {

/// Average displacement error: mean over pedestrians of the per-step mean
/// Euclidean distance between predicted and true positions.
double ade(const std::vector<std::vector<Vec2>>& pred,
           const std::vector<std::vector<Vec2>>& truth);

/// Final displacement error: mean over pedestrians of the Euclidean distance
/// at the last step only.
double fde(const std::vector<std::vector<Vec2>>& pred,
           const std::vector<std::vector<Vec2>>& truth);

}  // namespace stga
