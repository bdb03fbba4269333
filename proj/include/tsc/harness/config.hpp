#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "tsc/env/fixture.hpp"
#include "tsc/marl/hyperparameters.hpp"

namespace tsc::harness {

enum class Algorithm { maddpg, ddpg, dqn, fixed };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::maddpg;
  std::filesystem::path fixture_path;
  env::Fixture fixture;  // loaded, with demand and weight overrides applied
  marl::Hyperparameters hp;
  std::uint64_t seed = 0;
  int episodes = 1000;
  int horizon = 3600;
  int eval_every = 10;
  int eval_episodes = 3;
  int checkpoint_every = 0;
  bool write_step_csv = false;
  int fixed_time_green = 30;
  double demand_scale = 1.0;
  std::filesystem::path output_dir = "out";

  /// Canonical JSON of everything that shapes the run (output_dir excluded;
  /// the fixture is embedded by content, not by path).
  nlohmann::json canonical() const;
  /// FNV-1a 64 of canonical().dump(), as 16 hex digits.
  std::string digest() const;
};

/// Schema check, defaults, fixture load, semantic checks. Relative fixture
/// paths resolve against base_dir.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                                  const std::string& source = "config");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Output directory after the TSC_OUTPUT_DIR override, if set.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

std::string fnv1a_hex(std::string_view bytes);

}  // namespace tsc::harness
