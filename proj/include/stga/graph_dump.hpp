#pragma once

#include <string>

#include "stga/st_graph.hpp"

namespace stga {

/// JSON view of one snapshot: nodes, edges with features, and edge counts
/// (`hh_edge_count`, `ho_edge_count`, `temporal_edge_count`).
std::string snapshot_to_json(const GraphSnapshot& snapshot, double lambda);

}  // namespace stga
