#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tsc::env {

/// Network-wide traffic measures at one instant (or aggregated over an episode
/// by the harness).
struct MetricsRecord {
  int t = 0;
  std::int64_t total_queue = 0;       // queued vehicles on controlled lanes
  double mean_queue_per_lane = 0.0;   // total_queue / controlled lane count
  double total_wait = 0.0;            // sum of waiting clocks of queued vehicles
  std::int64_t completed_trips = 0;   // cumulative exits this episode
  double mean_delay = 0.0;            // mean waiting clock of completed vehicles
  std::int64_t minute_flow = 0;       // exits during the last 60 s
  std::int64_t exits_this_step = 0;
  std::int64_t spawned = 0;
  std::int64_t in_network = 0;
  std::int64_t virtual_queued = 0;
  std::vector<double> rewards;        // per agent, last step
};

struct StepResult {
  std::vector<std::vector<double>> observations;
  std::vector<double> rewards;
  MetricsRecord metrics;
  bool done = false;
};

/// Markov game seen by the learners: N agents, each with its own observation
/// vector, a discrete action set, and a per-agent reward after every joint step.
class MarkovGame {
 public:
  virtual ~MarkovGame() = default;

  virtual std::size_t agent_count() const = 0;
  virtual std::size_t observation_width(std::size_t agent) const = 0;
  virtual std::size_t action_count(std::size_t agent) const = 0;
  virtual int horizon() const = 0;
  virtual int clock() const = 0;
  virtual bool done() const = 0;

  /// Back to the initial state with a fresh random stream.
  virtual void reset(std::uint64_t seed) = 0;
  virtual std::vector<double> observe(std::size_t agent) const = 0;
  virtual StepResult step(std::span<const int> joint_action) = 0;
  virtual MetricsRecord metrics_snapshot() const = 0;

  std::vector<std::vector<double>> observe_all() const {
    std::vector<std::vector<double>> out;
    out.reserve(agent_count());
    for (std::size_t i = 0; i < agent_count(); ++i) out.push_back(observe(i));
    return out;
  }
};

}  // namespace tsc::env
