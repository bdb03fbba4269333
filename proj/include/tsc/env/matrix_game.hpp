#pragma once

#include <cstdint>
#include <vector>

#include "tsc/env/markov_game.hpp"

namespace tsc::env {

/// One-state, one-step cooperative or general-sum game. Joint actions are
/// indexed with agent 0 most significant.
class MatrixGame final : public MarkovGame {
 public:
  /// payoff[joint][agent]; must hold n_actions^n_agents rows of n_agents values.
  MatrixGame(std::vector<std::vector<double>> payoff, std::size_t n_agents, std::size_t n_actions);

  std::size_t agent_count() const override { return n_agents_; }
  std::size_t observation_width(std::size_t) const override { return 1; }
  std::size_t action_count(std::size_t) const override { return n_actions_; }
  int horizon() const override { return 1; }
  int clock() const override { return t_; }
  bool done() const override { return t_ >= 1; }

  void reset(std::uint64_t seed) override;
  std::vector<double> observe(std::size_t agent) const override;
  StepResult step(std::span<const int> joint_action) override;
  MetricsRecord metrics_snapshot() const override;

  std::size_t joint_index(std::span<const int> joint_action) const;
  const std::vector<std::vector<double>>& payoff() const { return payoff_; }

 private:
  std::vector<std::vector<double>> payoff_;
  std::size_t n_agents_;
  std::size_t n_actions_;
  int t_ = 0;
  std::vector<double> last_rewards_;
};

/// Exhaustive search for the joint action with the highest mean payoff across agents.
struct MatrixOptimum {
  std::size_t joint = 0;
  double value = 0.0;  // mean over agents
  bool unique = true;
};
MatrixOptimum brute_force_optimum(const MatrixGame& game);

}  // namespace tsc::env
