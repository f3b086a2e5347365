#include "stga/st_graph.hpp"

#include <algorithm>
#include <cmath>

namespace stga {

EdgeFeature edge_feature(const Vec2& src_pos, const Vec2& dst_pos) {
  return EdgeFeature{src_pos.x() - dst_pos.x(), src_pos.y() - dst_pos.y()};
}

int GraphSnapshot::hh_edge_count() const {
  return static_cast<int>(
      std::count_if(spatial_edges.begin(), spatial_edges.end(),
                    [](const SpatialEdge& e) { return e.cls == EdgeClass::HH; }));
}

int GraphSnapshot::ho_edge_count() const {
  return static_cast<int>(spatial_edges.size()) - hh_edge_count();
}

std::vector<const SpatialEdge*> GraphSnapshot::incoming(int ped_id) const {
  std::vector<const SpatialEdge*> out;
  for (const SpatialEdge& e : spatial_edges) {
    if (e.dst.id == ped_id) {
      out.push_back(&e);
    }
  }
  return out;
}

GraphSnapshot build_snapshot(const std::map<int, Vec2>& pedestrians,
                             const std::map<int, Vec2>& obstacles, double lambda,
                             GraphMode mode, int time_step) {
  if (!(lambda > 0.0)) {
    throw DomainError("build_snapshot: lambda must be positive");
  }
  GraphSnapshot snap;
  snap.time_step = time_step;
  snap.mode = mode;
  snap.pedestrians = pedestrians;
  if (mode == GraphMode::HHO) {
    snap.obstacles = obstacles;
  }

  for (const auto& [dst_id, dst_pos] : pedestrians) {
    // HH edges from every other pedestrian, ascending source id.
    for (const auto& [src_id, src_pos] : pedestrians) {
      if (src_id == dst_id) continue;
      snap.spatial_edges.push_back(SpatialEdge{NodeRef{NodeKind::Pedestrian, src_id},
                                               NodeRef{NodeKind::Pedestrian, dst_id},
                                               EdgeClass::HH, edge_feature(src_pos, dst_pos)});
    }
    // HO edges appear only when the obstacle is strictly inside the lambda
    // neighborhood; distance exactly lambda yields no edge.
    if (mode == GraphMode::HHO) {
      for (const auto& [obs_id, obs_pos] : obstacles) {
        if ((obs_pos - dst_pos).norm() < lambda) {
          snap.spatial_edges.push_back(SpatialEdge{NodeRef{NodeKind::Obstacle, obs_id},
                                                   NodeRef{NodeKind::Pedestrian, dst_id},
                                                   EdgeClass::HO,
                                                   edge_feature(obs_pos, dst_pos)});
        }
      }
    }
    snap.temporal_edges.push_back(TemporalEdge{NodeRef{NodeKind::Pedestrian, dst_id},
                                               EdgeFeature{dst_pos.x(), dst_pos.y()}});
  }
  // Map iteration already yields (dst, src) ascending per class; make the
  // (dst, class, src) ordering explicit anyway.
  std::sort(snap.spatial_edges.begin(), snap.spatial_edges.end(),
            [](const SpatialEdge& a, const SpatialEdge& b) {
              if (a.dst.id != b.dst.id) return a.dst.id < b.dst.id;
              if (a.cls != b.cls) return a.cls < b.cls;
              return a.src.id < b.src.id;
            });
  return snap;
}

SnapshotDiff diff_snapshots(const GraphSnapshot& prev, const GraphSnapshot& next) {
  SnapshotDiff d;
  for (const auto& [id, pos] : next.pedestrians) {
    if (prev.pedestrians.count(id) == 0) {
      d.entered.push_back(id);
    } else {
      d.persisting.push_back(id);
    }
  }
  for (const auto& [id, pos] : prev.pedestrians) {
    if (next.pedestrians.count(id) == 0) {
      d.exited.push_back(id);
    }
  }
  return d;
}

}  // namespace stga
