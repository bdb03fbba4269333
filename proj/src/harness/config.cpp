#include "tsc/harness/config.hpp"

#include <cstdio>
#include <cstdlib>

#include "tsc/errors.hpp"
#include "tsc/harness/schema.hpp"
#include "tsc/json_io.hpp"

namespace tsc::harness {

using nlohmann::json;

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::maddpg: return "maddpg";
    case Algorithm::ddpg: return "ddpg";
    case Algorithm::dqn: return "dqn";
    case Algorithm::fixed: return "fixed";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "maddpg") return Algorithm::maddpg;
  if (name == "ddpg") return Algorithm::ddpg;
  if (name == "dqn") return Algorithm::dqn;
  if (name == "fixed") return Algorithm::fixed;
  throw ConfigError("algorithm: \"" + name + "\" is not one of maddpg, ddpg, dqn, fixed");
}

namespace {

marl::Hyperparameters hyperparameters_from_json(const json& h) {
  marl::Hyperparameters hp;
  const auto set = [&](const char* key, auto& field) {
    if (h.contains(key)) field = h[key].get<std::remove_reference_t<decltype(field)>>();
  };
  set("buffer_capacity", hp.buffer_capacity);
  set("batch_size", hp.batch_size);
  set("gamma", hp.gamma);
  set("tau", hp.tau);
  set("actor_lr", hp.actor_lr);
  set("critic_lr", hp.critic_lr);
  set("weight_decay", hp.weight_decay);
  set("reward_scale", hp.reward_scale);
  set("noise_std", hp.noise_std);
  set("learn_every", hp.learn_every);
  set("clip_gradients", hp.clip_gradients);
  set("clip_norm", hp.clip_norm);
  set("fc1", hp.fc1);
  set("fc2", hp.fc2);
  set("ensemble_size", hp.ensemble_size);
  set("warmup_steps", hp.warmup_steps);
  set("epsilon_start", hp.epsilon_start);
  set("epsilon_end", hp.epsilon_end);
  set("epsilon_fraction", hp.epsilon_fraction);
  set("joint_action_limit", hp.joint_action_limit);
  hp.validate();
  return hp;
}

json hyperparameters_to_json(const marl::Hyperparameters& hp) {
  return {{"buffer_capacity", hp.buffer_capacity}, {"batch_size", hp.batch_size},
          {"gamma", hp.gamma},                     {"tau", hp.tau},
          {"actor_lr", hp.actor_lr},               {"critic_lr", hp.critic_lr},
          {"weight_decay", hp.weight_decay},       {"reward_scale", hp.reward_scale},
          {"noise_std", hp.noise_std},             {"learn_every", hp.learn_every},
          {"clip_gradients", hp.clip_gradients},   {"clip_norm", hp.clip_norm},
          {"fc1", hp.fc1},                         {"fc2", hp.fc2},
          {"ensemble_size", hp.ensemble_size},     {"warmup_steps", hp.warmup_steps},
          {"epsilon_start", hp.epsilon_start},     {"epsilon_end", hp.epsilon_end},
          {"epsilon_fraction", hp.epsilon_fraction}, {"joint_action_limit", hp.joint_action_limit}};
}

}  // namespace

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir, const std::string& source) {
  validate_against(experiment_schema(), doc, source + ": ");
  ExperimentConfig c;
  c.algorithm = algorithm_from_string(doc["algorithm"]);
  c.fixture_path = doc["fixture"].get<std::string>();
  if (c.fixture_path.is_relative()) c.fixture_path = base_dir / c.fixture_path;
  if (!std::filesystem::exists(c.fixture_path))
    throw ConfigError(source + ": fixture " + c.fixture_path.string() + " does not exist");
  c.fixture = env::load_fixture(c.fixture_path);

  c.seed = doc.value("seed", std::uint64_t{0});
  c.episodes = doc.value("episodes", c.episodes);
  c.horizon = doc.value("horizon", c.horizon);
  c.eval_every = doc.value("eval_every", c.eval_every);
  c.eval_episodes = doc.value("eval_episodes", c.eval_episodes);
  c.checkpoint_every = doc.value("checkpoint_every", c.checkpoint_every);
  c.write_step_csv = doc.value("write_step_csv", c.write_step_csv);
  c.fixed_time_green = doc.value("fixed_time_green", c.fixed_time_green);
  c.demand_scale = doc.value("demand_scale", c.demand_scale);
  if (doc.contains("output_dir")) c.output_dir = doc["output_dir"].get<std::string>();
  try {
    c.hp = hyperparameters_from_json(doc.value("hyperparameters", json::object()));
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }

  if (c.fixture.is_matrix()) {
    if (doc.contains("demand") || doc.contains("reward_weights") || c.demand_scale != 1.0)
      throw ConfigError(source + ": demand and reward weights do not apply to a matrix game");
    return c;
  }
  try {
    if (doc.contains("demand")) c.fixture.demand = env::demand_from_json(doc["demand"], *c.fixture.network);
    if (doc.contains("reward_weights"))
      c.fixture.weights = env::weights_from_json(doc["reward_weights"], c.fixture.weights);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  for (auto& flow : c.fixture.demand.flows)
    for (double& r : flow.rates) r *= c.demand_scale;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  return config_from_json(doc, path.parent_path(), path.string());
}

json ExperimentConfig::canonical() const {
  json fx;
  if (fixture.is_matrix()) {
    fx = {{"agents", fixture.matrix->agents}, {"actions", fixture.matrix->actions}, {"payoff", fixture.matrix->payoff}};
  } else {
    const env::RoadNetworkSpec& n = *fixture.network;
    json links = json::array();
    for (const auto& l : n.links) {
      json lanes = json::array();
      for (const auto& lane : l.lanes) lanes.push_back(lane.movements);
      links.push_back({l.id, l.from, l.to, l.free_flow_time, l.jam_capacity_per_lane, lanes});
    }
    json phases = json::array();
    for (const auto& is : n.intersections) phases.push_back({is.node, is.phases});
    json flows = json::array();
    for (const auto& f : fixture.demand.flows) flows.push_back({f.origin, f.destination, f.rates});
    const auto& w = fixture.weights;
    fx = {{"links", links},
          {"intersections", phases},
          {"priority_lanes", n.priority_lanes},
          {"saturation_headway", n.saturation_headway},
          {"yellow_time", n.yellow_time},
          {"segment_starts", fixture.demand.segment_starts},
          {"flows", flows},
          {"weights", {w.a1, w.b1, w.a2, w.b2}}};
  }
  return {{"algorithm", to_string(algorithm)},
          {"fixture", fx},
          {"hyperparameters", hyperparameters_to_json(hp)},
          {"seed", seed},
          {"episodes", episodes},
          {"horizon", horizon},
          {"eval_every", eval_every},
          {"checkpoint_every", checkpoint_every},
          {"write_step_csv", write_step_csv},
          {"fixed_time_green", fixed_time_green}};
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ExperimentConfig::digest() const { return fnv1a_hex(canonical().dump()); }

std::filesystem::path resolve_output_dir(const ExperimentConfig& config) {
  if (const char* env = std::getenv("TSC_OUTPUT_DIR"); env && *env) return env;
  return config.output_dir;
}

}  // namespace tsc::harness
