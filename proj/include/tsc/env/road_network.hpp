#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tsc::env {

enum class NodeKind { intersection, boundary };

struct NodeSpec {
  std::string id;
  NodeKind kind = NodeKind::boundary;
};

struct LaneSpec {
  std::vector<int> movements;  // downstream link indices this lane may feed; empty on exit links
};

struct LinkSpec {
  std::string id;
  int from = -1;
  int to = -1;
  double free_flow_time = 10.0;  // seconds
  int jam_capacity_per_lane = 20;
  std::vector<LaneSpec> lanes;
};

/// A phase is the set of incoming lanes (global lane ids) that have green.
using Phase = std::vector<int>;

struct IntersectionSpec {
  int node = -1;
  std::vector<Phase> phases;
};

struct RoadNetworkSpec {
  std::string name;
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<IntersectionSpec> intersections;
  std::vector<int> priority_lanes;  // L_p
  double saturation_headway = 2.0;  // s/veh/lane
  int yellow_time = 4;              // s

  /// Must be called after links change; assigns global lane ids.
  void index_lanes();

  std::size_t lane_count() const { return lane_link_.size(); }
  int lane_id(int link, int k) const { return lane_offset_[static_cast<std::size_t>(link)] + k; }
  int lane_link(int lane) const { return lane_link_[static_cast<std::size_t>(lane)]; }
  int lane_index(int lane) const { return lane - lane_offset_[static_cast<std::size_t>(lane_link(lane))]; }
  const LaneSpec& lane(int lane) const;

  /// Incoming lanes of intersection i: links ending at its node in link order,
  /// lanes in order. This fixes the observation layout.
  std::vector<int> incoming_lanes(std::size_t intersection) const;
  int node_index(const std::string& id) const;
  int link_index(const std::string& id) const;
  bool is_intersection(int node) const { return nodes[static_cast<std::size_t>(node)].kind == NodeKind::intersection; }

 private:
  std::vector<int> lane_offset_;
  std::vector<int> lane_link_;
};

struct RewardWeights {
  double a1 = 1.0;
  double b1 = 1.0;
  double a2 = 0.5;
  double b2 = 0.5;

  /// Throws ConfigError naming the violated constraint.
  void validate() const;
};

struct OdFlow {
  int origin = -1;
  int destination = -1;
  std::vector<double> rates;  // veh/s per demand segment
};

/// Piecewise-constant Poisson demand per origin-destination pair.
struct DemandProfile {
  std::vector<int> segment_starts{0, 1800};  // seconds, ascending, first is 0
  std::vector<OdFlow> flows;

  double rate(const OdFlow& flow, int t) const;
  void validate(const RoadNetworkSpec& spec) const;
};

/// Throws ConfigError on structural problems: dangling ids, lanes without a
/// serving phase, bad movements, fewer than two phases, duplicate phases.
void validate_network(const RoadNetworkSpec& spec);

/// Minimal free-flow-time link sequence from origin to destination node,
/// ties broken by the lexicographically smallest link-index sequence.
/// Throws ConfigError when the destination is unreachable.
std::vector<int> route_vehicle(const RoadNetworkSpec& spec, int origin, int destination);

}  // namespace tsc::env
