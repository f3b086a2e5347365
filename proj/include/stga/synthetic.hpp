#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stga/trajectory_data.hpp"

namespace stga {

enum class Scenario { Linear, Crossing, ObstacleAvoid };

Scenario scenario_from_string(const std::string& name);

/// Builds one synthetic scene: a single 20-step instance with `n_peds`
/// pedestrians, coordinates in [0,1], identity transform.
///   linear         - constant-velocity tracks
///   crossing       - two groups on intersecting straight paths
///   obstacle_avoid - tracks deflected around a near-central point obstacle,
///                    keeping clearance >= lambda/2 at every step
SceneDataset make_synthetic(Scenario scenario, int n_peds, std::uint64_t seed,
                            double lambda = 0.5);

/// A set of independent synthetic scenes (instance start frames distinct).
std::vector<SceneDataset> make_synthetic_set(Scenario scenario, int n_instances,
                                             int peds_per_instance, std::uint64_t base_seed,
                                             double lambda = 0.5);

}  // namespace stga
