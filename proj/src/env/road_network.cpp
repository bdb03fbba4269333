#include "tsc/env/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include "tsc/errors.hpp"

namespace tsc::env {

void RoadNetworkSpec::index_lanes() {
  lane_offset_.clear();
  lane_link_.clear();
  for (std::size_t l = 0; l < links.size(); ++l) {
    lane_offset_.push_back(static_cast<int>(lane_link_.size()));
    for (std::size_t k = 0; k < links[l].lanes.size(); ++k) lane_link_.push_back(static_cast<int>(l));
  }
}

const LaneSpec& RoadNetworkSpec::lane(int lane) const {
  return links[static_cast<std::size_t>(lane_link(lane))].lanes[static_cast<std::size_t>(lane_index(lane))];
}

std::vector<int> RoadNetworkSpec::incoming_lanes(std::size_t intersection) const {
  std::vector<int> out;
  const int node = intersections[intersection].node;
  for (std::size_t l = 0; l < links.size(); ++l) {
    if (links[l].to != node) continue;
    for (std::size_t k = 0; k < links[l].lanes.size(); ++k)
      out.push_back(lane_id(static_cast<int>(l), static_cast<int>(k)));
  }
  return out;
}

int RoadNetworkSpec::node_index(const std::string& id) const {
  for (std::size_t n = 0; n < nodes.size(); ++n)
    if (nodes[n].id == id) return static_cast<int>(n);
  return -1;
}

int RoadNetworkSpec::link_index(const std::string& id) const {
  for (std::size_t l = 0; l < links.size(); ++l)
    if (links[l].id == id) return static_cast<int>(l);
  return -1;
}

void RewardWeights::validate() const {
  if (a1 < 0 || b1 < 0 || a2 < 0 || b2 < 0) throw ConfigError("reward weights must be nonnegative");
  if (a2 < b2) throw ConfigError("a2 >= b2 violated");
  if (std::abs(a2 + b2 - 1.0) > 1e-12) throw ConfigError("a2 + b2 = 1 violated");
}

double DemandProfile::rate(const OdFlow& flow, int t) const {
  std::size_t seg = 0;
  while (seg + 1 < segment_starts.size() && t >= segment_starts[seg + 1]) ++seg;
  return flow.rates[seg];
}

void DemandProfile::validate(const RoadNetworkSpec& spec) const {
  if (segment_starts.empty() || segment_starts.front() != 0)
    throw ConfigError("demand segments must start at t = 0");
  if (!std::is_sorted(segment_starts.begin(), segment_starts.end()) ||
      std::adjacent_find(segment_starts.begin(), segment_starts.end()) != segment_starts.end())
    throw ConfigError("demand segment starts must be strictly increasing");
  for (const auto& f : flows) {
    const auto in_range = [&](int n) { return n >= 0 && n < static_cast<int>(spec.nodes.size()); };
    if (!in_range(f.origin) || !in_range(f.destination)) throw ConfigError("demand references an unknown node");
    if (spec.is_intersection(f.origin) || spec.is_intersection(f.destination))
      throw ConfigError("demand origins and destinations must be boundary nodes");
    if (f.origin == f.destination) throw ConfigError("demand origin equals destination");
    if (f.rates.size() != segment_starts.size()) throw ConfigError("demand rate count does not match segments");
    for (double r : f.rates)
      if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("demand rates must be finite and >= 0");
  }
}

void validate_network(const RoadNetworkSpec& spec) {
  const int n_nodes = static_cast<int>(spec.nodes.size());
  if (spec.intersections.empty()) throw ConfigError("network has no signalized intersection");
  if (spec.lane_count() == 0 && !spec.links.empty()) throw ConfigError("lanes not indexed");
  if (!(spec.saturation_headway > 0.0)) throw ConfigError("saturation headway must be positive");
  if (spec.yellow_time < 0) throw ConfigError("yellow time must be >= 0");

  std::set<std::string> ids;
  for (const auto& n : spec.nodes)
    if (!ids.insert(n.id).second) throw ConfigError("duplicate node id " + n.id);

  for (std::size_t l = 0; l < spec.links.size(); ++l) {
    const LinkSpec& link = spec.links[l];
    const std::string where = "link " + link.id;
    if (link.from < 0 || link.from >= n_nodes || link.to < 0 || link.to >= n_nodes)
      throw ConfigError(where + " references an unknown node");
    if (!spec.is_intersection(link.from) && !spec.is_intersection(link.to))
      throw ConfigError(where + " joins two boundary nodes");
    if (link.lanes.empty()) throw ConfigError(where + " has no lanes");
    if (!(link.free_flow_time >= 1.0)) throw ConfigError(where + " free-flow time must be >= 1 s");
    if (link.jam_capacity_per_lane < 1) throw ConfigError(where + " jam capacity must be >= 1");
    for (const LaneSpec& lane : link.lanes) {
      if (!spec.is_intersection(link.to)) {
        if (!lane.movements.empty()) throw ConfigError(where + " ends at a sink but lists movements");
        continue;
      }
      if (lane.movements.empty()) throw ConfigError(where + " has a lane without movements");
      for (int m : lane.movements) {
        if (m < 0 || m >= static_cast<int>(spec.links.size()))
          throw ConfigError(where + " lists an unknown movement");
        if (spec.links[static_cast<std::size_t>(m)].from != link.to)
          throw ConfigError(where + " movement does not leave its downstream node");
      }
    }
  }

  std::set<int> controlled;
  for (std::size_t i = 0; i < spec.intersections.size(); ++i) {
    const IntersectionSpec& is = spec.intersections[i];
    if (is.node < 0 || is.node >= n_nodes || !spec.is_intersection(is.node))
      throw ConfigError("intersection " + std::to_string(i) + " does not name an intersection node");
    if (!controlled.insert(is.node).second) throw ConfigError("node controlled twice");
    if (is.phases.size() < 2) throw ConfigError("intersection " + std::to_string(i) + " needs at least 2 phases");
    const std::vector<int> incoming = spec.incoming_lanes(i);
    std::set<Phase> distinct;
    std::set<int> served;
    for (const Phase& p : is.phases) {
      Phase sorted = p;
      std::sort(sorted.begin(), sorted.end());
      if (!distinct.insert(sorted).second)
        throw ConfigError("intersection " + std::to_string(i) + " has duplicate phases");
      for (int lane : p) {
        if (std::find(incoming.begin(), incoming.end(), lane) == incoming.end())
          throw ConfigError("phase lists a lane that does not enter intersection " + std::to_string(i));
        served.insert(lane);
      }
    }
    for (int lane : incoming)
      if (!served.contains(lane))
        throw ConfigError("lane " + spec.links[static_cast<std::size_t>(spec.lane_link(lane))].id + ":" +
                          std::to_string(spec.lane_index(lane)) + " is served by no phase");
  }
  for (std::size_t n = 0; n < spec.nodes.size(); ++n)
    if (spec.nodes[n].kind == NodeKind::intersection && !controlled.contains(static_cast<int>(n)))
      throw ConfigError("intersection node " + spec.nodes[n].id + " has no phase table");
  for (int lane : spec.priority_lanes)
    if (lane < 0 || lane >= static_cast<int>(spec.lane_count())) throw ConfigError("unknown priority lane");
}

std::vector<int> route_vehicle(const RoadNetworkSpec& spec, int origin, int destination) {
  const int n_nodes = static_cast<int>(spec.nodes.size());
  if (origin < 0 || origin >= n_nodes || destination < 0 || destination >= n_nodes)
    throw ConfigError("route endpoints must be existing nodes");

  struct Label {
    double cost;
    std::vector<int> path;
    bool better_than(const Label& o) const { return cost < o.cost || (cost == o.cost && path < o.path); }
  };
  const std::size_t n_links = spec.links.size();
  std::vector<std::optional<Label>> best(n_links);
  std::vector<bool> settled(n_links, false);
  for (std::size_t l = 0; l < n_links; ++l)
    if (spec.links[l].from == origin)
      best[l] = Label{spec.links[l].free_flow_time, {static_cast<int>(l)}};

  // Label-setting search over links; lexicographic tie-breaks are stable under
  // suffix extension because all link costs are positive.
  while (true) {
    std::optional<std::size_t> pick;
    for (std::size_t l = 0; l < n_links; ++l)
      if (!settled[l] && best[l] && (!pick || best[l]->better_than(*best[*pick]))) pick = l;
    if (!pick) break;
    const std::size_t l = *pick;
    settled[l] = true;
    const LinkSpec& link = spec.links[l];
    if (link.to == destination) return best[l]->path;
    if (!spec.is_intersection(link.to)) continue;
    std::set<int> next;
    for (const LaneSpec& lane : link.lanes) next.insert(lane.movements.begin(), lane.movements.end());
    for (int m : next) {
      const auto mi = static_cast<std::size_t>(m);
      if (settled[mi]) continue;
      Label cand{best[l]->cost + spec.links[mi].free_flow_time, best[l]->path};
      cand.path.push_back(m);
      if (!best[mi] || cand.better_than(*best[mi])) best[mi] = std::move(cand);
    }
  }
  throw ConfigError("destination " + spec.nodes[static_cast<std::size_t>(destination)].id +
                    " is unreachable from " + spec.nodes[static_cast<std::size_t>(origin)].id);
}

}  // namespace tsc::env
