#pragma once

#include <map>
#include <string>
#include <vector>

#include "stga/types.hpp"

namespace stga {

enum class NodeKind { Pedestrian, Obstacle };
enum class EdgeClass { HH, HO };
enum class GraphMode { HH, HHO };

struct NodeRef {
  NodeKind kind = NodeKind::Pedestrian;
  int id = 0;

  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

/// Relative displacement (src - dst) for spatial edges; for a temporal
/// self-edge it is the node's absolute position.
struct EdgeFeature {
  double dx = 0.0;
  double dy = 0.0;
};

struct SpatialEdge {
  NodeRef src;
  NodeRef dst;  // always a pedestrian
  EdgeClass cls = EdgeClass::HH;
  EdgeFeature feature;
};

struct TemporalEdge {
  NodeRef node;
  EdgeFeature feature;
};

/// One time-step of the spatio-temporal graph. Every unordered pedestrian
/// pair contributes two directed HH edges; obstacle influence is a single
/// directed edge obstacle->pedestrian, present only within distance lambda.
/// Edges are stored sorted by (dst id, class, src id) so per-node views are
/// deterministic.
struct GraphSnapshot {
  int time_step = 0;
  GraphMode mode = GraphMode::HH;
  std::map<int, Vec2> pedestrians;          // ped id -> position
  std::map<int, Vec2> obstacles;            // obstacle id -> position (HHO only)
  std::vector<SpatialEdge> spatial_edges;
  std::vector<TemporalEdge> temporal_edges;

  int hh_edge_count() const;
  int ho_edge_count() const;
  /// Incoming spatial edges of one pedestrian, in stored (class, src) order.
  std::vector<const SpatialEdge*> incoming(int ped_id) const;
};

EdgeFeature edge_feature(const Vec2& src_pos, const Vec2& dst_pos);

GraphSnapshot build_snapshot(const std::map<int, Vec2>& pedestrians,
                             const std::map<int, Vec2>& obstacles, double lambda,
                             GraphMode mode, int time_step = 0);

struct SnapshotDiff {
  std::vector<int> entered;
  std::vector<int> exited;
  std::vector<int> persisting;
};

/// Partitions pedestrian ids between two consecutive snapshots. Persisting
/// nodes carry LSTM state forward; entered nodes get zero state; exited
/// nodes' state is dropped.
SnapshotDiff diff_snapshots(const GraphSnapshot& prev, const GraphSnapshot& next);

}  // namespace stga
