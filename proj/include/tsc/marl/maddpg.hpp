#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tsc/marl/actor_critic.hpp"

namespace tsc::marl {

struct UpdateStats {
  bool trained = false;
  double critic_loss = 0.0;
  double actor_grad_norm = 0.0;
};

/// One intersection's learner: K sub-policies, each with its own replay buffer.
struct MaddpgAgent {
  std::size_t index = 0;
  std::vector<DdpgPair> ensemble;
  std::vector<std::shared_ptr<ReplayBuffer>> buffers;
  std::size_t active = 0;

  DdpgPair& policy() { return ensemble[active]; }
  const DdpgPair& policy() const { return ensemble[active]; }
  ReplayBuffer& buffer() { return *buffers[active]; }
  const ReplayBuffer& buffer() const { return *buffers[active]; }
};

/// MADDPG with centralized critics, or independent DDPG learners when the
/// critic scope is local. With K = 1 every agent's single buffer receives the
/// same transitions, so one buffer object backs all of them.
class ActorCriticLearner {
 public:
  ActorCriticLearner(JointLayout layout, Hyperparameters hp, CriticScope scope, std::uint64_t seed);

  /// Draws each agent's active sub-policy for the coming episode.
  void begin_episode(Rng& rng);
  std::size_t select_subpolicy(std::size_t agent, Rng& rng);

  ActionChoice act(std::size_t agent, std::span<const double> observation, bool explore, Rng& rng) const;
  /// Appends to every agent's active buffer.
  void store(const Transition& t);
  /// Skipped (nullopt) on the frequency gate or when no agent's buffer holds a
  /// full warm-up; otherwise critic then actor update per agent in index
  /// order, then a soft update of every trained agent's targets.
  std::optional<std::vector<UpdateStats>> train_step(std::int64_t step_index, Rng& rng);

  const JointLayout& layout() const { return layout_; }
  const Hyperparameters& hyperparameters() const { return hp_; }
  CriticScope scope() const { return scope_; }
  std::vector<MaddpgAgent>& agents() { return agents_; }
  const std::vector<MaddpgAgent>& agents() const { return agents_; }
  bool shared_buffer() const { return hp_.ensemble_size == 1; }

  void write(net::ByteWriter& w) const;
  /// Restores state written by write() into a learner built from the same config.
  void read(net::ByteReader& r);

 private:
  JointLayout layout_;
  Hyperparameters hp_;
  CriticScope scope_;
  std::vector<MaddpgAgent> agents_;
};

}  // namespace tsc::marl
