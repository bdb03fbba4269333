#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsc/harness/config.hpp"
#include "tsc/harness/controller.hpp"
#include "tsc/harness/csv.hpp"

namespace tsc::harness {

// Labels for derive_seed so each consumer of randomness has its own stream.
inline constexpr std::uint64_t kEnvStream = 11;
inline constexpr std::uint64_t kActStream = 12;
inline constexpr std::uint64_t kTrainStream = 13;
inline constexpr std::uint64_t kGreedyStream = 14;

/// Per-step series of one episode.
struct StepTrace {
  std::vector<double> mean_queue;           // per controlled lane
  std::vector<double> mean_delay;           // over vehicles completed so far
  std::vector<std::int64_t> cumulative_exits;
  std::vector<std::int64_t> total_queue;
  std::vector<double> total_wait;

  friend bool operator==(const StepTrace&, const StepTrace&) = default;
};

struct EpisodeOutcome {
  EpisodeRow row;
  StepTrace trace;
  std::int64_t updates = 0;
  /// Conservation spawned = exited + in network + virtual queue at every step.
  bool conserved = true;
};

enum class EpisodeMode { train, greedy };

/// One episode: reset the game with env_seed, then act/step (and in train
/// mode, store and learn) until done. Greedy mode touches no learnable state.
EpisodeOutcome run_episode(env::MarkovGame& game, Controller& controller, const ExperimentConfig& config,
                           std::int64_t episode, std::uint64_t env_seed, EpisodeMode mode, marl::Rng& act_rng,
                           marl::Rng& train_rng);

struct TrainOptions {
  std::optional<std::filesystem::path> resume;
  /// Wins over TSC_OUTPUT_DIR and the config.
  std::optional<std::filesystem::path> output_dir;
  std::ostream* log = nullptr;  // one line per episode when set
};

struct RunArtifacts {
  std::filesystem::path dir;
  std::vector<EpisodeRow> episodes;
  std::vector<EpisodeRow> evaluations;
  std::int64_t best_episode = 0;  // 1-based, max total_reward, earliest on ties
  StepTrace best_trace;
  std::int64_t updates = 0;
  std::vector<std::filesystem::path> checkpoints;
  nlohmann::json summary;
};

/// Files under the output directory: episodes.csv, eval.csv, steps.csv (when
/// enabled), checkpoints/episode-NNNNNN.ckpt, summary.json, config.json.
RunArtifacts run_training(const ExperimentConfig& config, const TrainOptions& options = {});

struct EvaluationResult {
  std::vector<EpisodeRow> rows;
  EpisodeRow mean;
  /// Conservation held at every step of every episode.
  bool conserved = true;
};

/// Greedy episodes j = 0..E-1 on environment seed config.seed + j. Without a
/// checkpoint the controller is freshly initialized (the usual case for fixed time).
EvaluationResult run_evaluation(const ExperimentConfig& config, const std::optional<std::filesystem::path>& checkpoint,
                                int episodes);
EvaluationResult evaluate_controller(const ExperimentConfig& config, Controller& controller, int episodes);

struct Checkpoint {
  std::string digest;
  std::int64_t episodes_done = 0;
  std::vector<std::uint8_t> controller;
  std::vector<EpisodeRow> episodes;
  std::vector<EpisodeRow> evaluations;
  std::int64_t best_episode = 0;
  StepTrace best_trace;
};

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// load_checkpoint plus a digest comparison against the config.
Checkpoint load_checkpoint_for(const ExperimentConfig& config, const std::filesystem::path& path);

/// Trains every config into out_dir/<label>, then writes rewards.csv,
/// queue.csv, delay.csv, flow.csv (per minute) and manifest.json.
std::vector<RunArtifacts> compare(const std::vector<ExperimentConfig>& configs, const std::filesystem::path& out_dir,
                                  std::ostream* log = nullptr);

}  // namespace tsc::harness
