#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tsc/marl/actor_critic.hpp"
#include "tsc/marl/maddpg.hpp"

namespace tsc::marl {

/// Number of joint phase assignments; throws ConfigError above the limit.
std::size_t joint_action_count(std::span<const std::size_t> action_counts, std::size_t limit);

/// One Q-network over the global state with an output per joint phase
/// assignment (agent 0 most significant), trained on the summed reward.
class CentralizedDqn {
 public:
  CentralizedDqn(JointLayout layout, Hyperparameters hp, std::uint64_t seed, std::int64_t total_training_steps);

  std::size_t joint_actions() const { return joint_actions_; }
  std::vector<int> decode(std::size_t joint) const;
  std::size_t encode(std::span<const int> phases) const;

  /// Linear decay from epsilon_start to epsilon_end over the first
  /// epsilon_fraction of training steps, then constant.
  double epsilon() const;
  double epsilon_at(std::int64_t step) const;

  /// Exploring calls advance the schedule; greedy ties go to the lowest index.
  std::size_t act(std::span<const double> state, bool explore, Rng& rng);
  std::size_t greedy(std::span<const double> state) const;

  /// reward is the (scaled) sum over agents.
  void store(std::span<const double> state, std::size_t joint, double reward, std::span<const double> next_state,
             std::int64_t step_index);
  std::optional<UpdateStats> train_step(std::int64_t step_index, Rng& rng);

  /// y = r + gamma * max_a' Q'(x', a').
  std::vector<double> compute_targets(const Minibatch& batch) const;

  net::Mlp& q() { return q_; }
  const net::Mlp& q() const { return q_; }
  const net::Mlp& q_target() const { return q_target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::int64_t steps_taken() const { return steps_; }

  void write(net::ByteWriter& w) const;
  void read(net::ByteReader& r);

 private:
  JointLayout layout_;
  Hyperparameters hp_;
  std::size_t joint_actions_;
  std::int64_t total_steps_;
  net::Mlp q_, q_target_;
  net::AdamState opt_;
  ReplayBuffer buffer_;
  std::int64_t steps_ = 0;
};

/// Cyclic plan: phases in table order, each held for its green time.
struct FixedTimeSchedule {
  std::vector<std::vector<int>> green;  // [intersection][phase] seconds

  static FixedTimeSchedule uniform(std::span<const std::size_t> phase_counts, int green_seconds = 30);
  void validate() const;
  int phase(std::size_t intersection, std::int64_t t) const;
  std::vector<int> actions(std::int64_t t) const;
};

}  // namespace tsc::marl
