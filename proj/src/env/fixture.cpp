#include "tsc/env/fixture.hpp"

#include <set>

#include "tsc/errors.hpp"
#include "tsc/json_io.hpp"

namespace tsc::env {
namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  return obj.at(key);
}

template <typename T>
T get_as(const json& v, const std::string& where) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": wrong value type");
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, _] : obj.items())
    if (!ok.contains(k)) throw ConfigError(where + ": unknown key \"" + k + "\"");
}

int node_ref(const RoadNetworkSpec& spec, const json& v, const std::string& where) {
  const auto id = get_as<std::string>(v, where);
  const int n = spec.node_index(id);
  if (n < 0) throw ConfigError(where + ": unknown node \"" + id + "\"");
  return n;
}

int link_ref(const RoadNetworkSpec& spec, const json& v, const std::string& where) {
  const auto id = get_as<std::string>(v, where);
  const int l = spec.link_index(id);
  if (l < 0) throw ConfigError(where + ": unknown link \"" + id + "\"");
  return l;
}

// "link:k"
int lane_ref(const RoadNetworkSpec& spec, const json& v, const std::string& where) {
  const auto ref = get_as<std::string>(v, where);
  const auto colon = ref.rfind(':');
  if (colon == std::string::npos) throw ConfigError(where + ": lane reference \"" + ref + "\" must be link:index");
  const int l = spec.link_index(ref.substr(0, colon));
  if (l < 0) throw ConfigError(where + ": unknown link in \"" + ref + "\"");
  int k = -1;
  try {
    std::size_t used = 0;
    k = std::stoi(ref.substr(colon + 1), &used);
    if (used != ref.size() - colon - 1) k = -1;
  } catch (const std::exception&) {
  }
  if (k < 0 || k >= static_cast<int>(spec.links[static_cast<std::size_t>(l)].lanes.size()))
    throw ConfigError(where + ": bad lane index in \"" + ref + "\"");
  return spec.lane_id(l, k);
}

RoadNetworkSpec network_from_json(const json& doc) {
  RoadNetworkSpec spec;
  spec.name = get_as<std::string>(require(doc, "name", "fixture"), "name");
  if (doc.contains("saturation_headway"))
    spec.saturation_headway = get_as<double>(doc["saturation_headway"], "saturation_headway");
  if (doc.contains("yellow_time")) spec.yellow_time = get_as<int>(doc["yellow_time"], "yellow_time");

  for (const auto& n : require(doc, "nodes", "fixture")) {
    reject_unknown(n, {"id", "kind"}, "node");
    NodeSpec node;
    node.id = get_as<std::string>(require(n, "id", "node"), "node id");
    const auto kind = get_as<std::string>(require(n, "kind", "node " + node.id), "node kind");
    if (kind == "intersection")
      node.kind = NodeKind::intersection;
    else if (kind == "boundary")
      node.kind = NodeKind::boundary;
    else
      throw ConfigError("node " + node.id + ": kind must be intersection or boundary");
    spec.nodes.push_back(node);
  }

  const json& links = require(doc, "links", "fixture");
  for (const auto& l : links) {
    reject_unknown(l, {"id", "from", "to", "free_flow_time", "jam_capacity_per_lane", "lanes"}, "link");
    LinkSpec link;
    link.id = get_as<std::string>(require(l, "id", "link"), "link id");
    const std::string where = "link " + link.id;
    link.from = node_ref(spec, require(l, "from", where), where + " from");
    link.to = node_ref(spec, require(l, "to", where), where + " to");
    if (l.contains("free_flow_time")) link.free_flow_time = get_as<double>(l["free_flow_time"], where);
    if (l.contains("jam_capacity_per_lane")) link.jam_capacity_per_lane = get_as<int>(l["jam_capacity_per_lane"], where);
    link.lanes.resize(require(l, "lanes", where).size());
    spec.links.push_back(link);
  }
  // Movements name links, so resolve them once every link id is known.
  for (std::size_t li = 0; li < spec.links.size(); ++li) {
    const json& lanes = links[li]["lanes"];
    const std::string where = "link " + spec.links[li].id;
    for (std::size_t k = 0; k < lanes.size(); ++k) {
      reject_unknown(lanes[k], {"movements"}, where + " lane");
      if (!lanes[k].contains("movements")) continue;
      for (const auto& m : lanes[k]["movements"])
        spec.links[li].lanes[k].movements.push_back(link_ref(spec, m, where + " movement"));
    }
  }
  spec.index_lanes();

  for (const auto& is : require(doc, "intersections", "fixture")) {
    reject_unknown(is, {"node", "phases"}, "intersection");
    IntersectionSpec out;
    out.node = node_ref(spec, require(is, "node", "intersection"), "intersection node");
    const std::string where = "intersection " + spec.nodes[static_cast<std::size_t>(out.node)].id;
    for (const auto& p : require(is, "phases", where)) {
      Phase phase;
      for (const auto& lane : p) phase.push_back(lane_ref(spec, lane, where + " phase"));
      out.phases.push_back(std::move(phase));
    }
    spec.intersections.push_back(std::move(out));
  }
  if (doc.contains("priority_lanes"))
    for (const auto& lane : doc["priority_lanes"]) spec.priority_lanes.push_back(lane_ref(spec, lane, "priority_lanes"));

  validate_network(spec);
  return spec;
}

MatrixSpec matrix_from_json(const json& doc) {
  MatrixSpec m;
  m.agents = get_as<std::size_t>(require(doc, "agents", "matrix game"), "agents");
  m.actions = get_as<std::size_t>(require(doc, "actions", "matrix game"), "actions");
  m.payoff = get_as<std::vector<std::vector<double>>>(require(doc, "payoff", "matrix game"), "payoff");
  MatrixGame(m.payoff, m.agents, m.actions);  // shape check
  return m;
}

}  // namespace

RewardWeights weights_from_json(const json& doc, RewardWeights w) {
  reject_unknown(doc, {"a1", "b1", "a2", "b2"}, "reward_weights");
  if (doc.contains("a1")) w.a1 = get_as<double>(doc["a1"], "a1");
  if (doc.contains("b1")) w.b1 = get_as<double>(doc["b1"], "b1");
  if (doc.contains("a2")) w.a2 = get_as<double>(doc["a2"], "a2");
  if (doc.contains("b2")) w.b2 = get_as<double>(doc["b2"], "b2");
  w.validate();
  return w;
}

DemandProfile demand_from_json(const json& doc, const RoadNetworkSpec& spec) {
  reject_unknown(doc, {"segment_starts", "flows"}, "demand");
  DemandProfile d;
  if (doc.contains("segment_starts")) d.segment_starts = get_as<std::vector<int>>(doc["segment_starts"], "segment_starts");
  for (const auto& f : require(doc, "flows", "demand")) {
    reject_unknown(f, {"origin", "destination", "rates"}, "demand flow");
    OdFlow flow;
    flow.origin = node_ref(spec, require(f, "origin", "demand flow"), "demand origin");
    flow.destination = node_ref(spec, require(f, "destination", "demand flow"), "demand destination");
    flow.rates = get_as<std::vector<double>>(require(f, "rates", "demand flow"), "rates");
    d.flows.push_back(std::move(flow));
  }
  d.validate(spec);
  return d;
}

Fixture fixture_from_json(const json& doc) {
  Fixture fx;
  const auto kind = get_as<std::string>(require(doc, "kind", "fixture"), "kind");
  fx.name = get_as<std::string>(require(doc, "name", "fixture"), "name");
  if (kind == "matrix_game") {
    reject_unknown(doc, {"kind", "name", "agents", "actions", "payoff"}, "fixture");
    fx.matrix = matrix_from_json(doc);
    return fx;
  }
  if (kind != "road_network") throw ConfigError("fixture kind must be road_network or matrix_game");
  reject_unknown(doc,
                 {"kind", "name", "saturation_headway", "yellow_time", "nodes", "links", "intersections",
                  "priority_lanes", "demand", "reward_weights"},
                 "fixture");
  fx.network = network_from_json(doc);
  if (doc.contains("demand")) fx.demand = demand_from_json(doc["demand"], *fx.network);
  if (doc.contains("reward_weights")) fx.weights = weights_from_json(doc["reward_weights"]);
  return fx;
}

Fixture load_fixture(const std::filesystem::path& path) { return fixture_from_json(read_json_file(path)); }

}  // namespace tsc::env
