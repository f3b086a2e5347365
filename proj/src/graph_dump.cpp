#include "stga/graph_dump.hpp"

#include <json.hpp>

namespace stga {

std::string snapshot_to_json(const GraphSnapshot& snapshot, double lambda) {
  nlohmann::ordered_json j;
  j["time_step"] = snapshot.time_step;
  j["mode"] = snapshot.mode == GraphMode::HH ? "hh" : "hho";
  j["lambda"] = lambda;

  auto nodes = nlohmann::ordered_json::array();
  for (const auto& [id, pos] : snapshot.pedestrians) {
    nodes.push_back({{"kind", "pedestrian"}, {"id", id}, {"x", pos.x()}, {"y", pos.y()}});
  }
  for (const auto& [id, pos] : snapshot.obstacles) {
    nodes.push_back({{"kind", "obstacle"}, {"id", id}, {"x", pos.x()}, {"y", pos.y()}});
  }
  j["nodes"] = std::move(nodes);

  auto spatial = nlohmann::ordered_json::array();
  for (const SpatialEdge& e : snapshot.spatial_edges) {
    spatial.push_back({{"class", e.cls == EdgeClass::HH ? "hh" : "ho"},
                       {"src", e.src.id},
                       {"dst", e.dst.id},
                       {"dx", e.feature.dx},
                       {"dy", e.feature.dy}});
  }
  j["spatial_edges"] = std::move(spatial);

  auto temporal = nlohmann::ordered_json::array();
  for (const TemporalEdge& e : snapshot.temporal_edges) {
    temporal.push_back({{"id", e.node.id}, {"dx", e.feature.dx}, {"dy", e.feature.dy}});
  }
  j["temporal_edges"] = std::move(temporal);

  j["hh_edge_count"] = snapshot.hh_edge_count();
  j["ho_edge_count"] = snapshot.ho_edge_count();
  j["temporal_edge_count"] = static_cast<int>(snapshot.temporal_edges.size());
  return j.dump(2) + "\n";
}

}  // namespace stga
