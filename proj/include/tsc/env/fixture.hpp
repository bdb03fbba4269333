#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsc/env/matrix_game.hpp"
#include "tsc/env/road_network.hpp"

namespace tsc::env {

struct MatrixSpec {
  std::size_t agents = 0;
  std::size_t actions = 0;
  std::vector<std::vector<double>> payoff;  // [joint][agent]
};

/// Contents of one fixture file: either a road network with its default
/// demand and reward weights, or a matrix game.
struct Fixture {
  std::string name;
  std::optional<RoadNetworkSpec> network;
  DemandProfile demand;
  RewardWeights weights;
  std::optional<MatrixSpec> matrix;

  bool is_matrix() const { return matrix.has_value(); }
};

Fixture fixture_from_json(const nlohmann::json& doc);
Fixture load_fixture(const std::filesystem::path& path);

/// Reads {"segment_starts": [...], "flows": [{origin, destination, rates}]}
/// with node ids resolved against the network.
DemandProfile demand_from_json(const nlohmann::json& doc, const RoadNetworkSpec& spec);
RewardWeights weights_from_json(const nlohmann::json& doc, RewardWeights base = {});

}  // namespace tsc::env
