#include "tsc/env/matrix_game.hpp"

#include <numeric>
#include <string>

#include "tsc/errors.hpp"

namespace tsc::env {

MatrixGame::MatrixGame(std::vector<std::vector<double>> payoff, std::size_t n_agents, std::size_t n_actions)
    : payoff_(std::move(payoff)), n_agents_(n_agents), n_actions_(n_actions) {
  if (n_agents_ == 0 || n_actions_ == 0) throw ConfigError("matrix game needs agents and actions");
  std::size_t rows = 1;
  for (std::size_t i = 0; i < n_agents_; ++i) rows *= n_actions_;
  if (payoff_.size() != rows)
    throw ShapeError("payoff table has " + std::to_string(payoff_.size()) + " rows, expected " + std::to_string(rows));
  for (const auto& row : payoff_)
    if (row.size() != n_agents_) throw ShapeError("payoff row width must equal the agent count");
  reset(0);
}

void MatrixGame::reset(std::uint64_t) {
  t_ = 0;
  last_rewards_.assign(n_agents_, 0.0);
}

std::vector<double> MatrixGame::observe(std::size_t agent) const {
  if (agent >= n_agents_) throw SimulationError("unknown agent " + std::to_string(agent));
  return {1.0};
}

std::size_t MatrixGame::joint_index(std::span<const int> joint_action) const {
  if (joint_action.size() != n_agents_) throw SimulationError("joint action has the wrong length");
  std::size_t idx = 0;
  for (int a : joint_action) {
    if (a < 0 || a >= static_cast<int>(n_actions_)) throw SimulationError("action out of range");
    idx = idx * n_actions_ + static_cast<std::size_t>(a);
  }
  return idx;
}

StepResult MatrixGame::step(std::span<const int> joint_action) {
  if (done()) throw SimulationError("step called after the episode ended");
  StepResult out;
  out.rewards = payoff_[joint_index(joint_action)];
  last_rewards_ = out.rewards;
  ++t_;
  out.observations = observe_all();
  out.metrics = metrics_snapshot();
  out.done = true;
  return out;
}

MetricsRecord MatrixGame::metrics_snapshot() const {
  MetricsRecord m;
  m.t = t_;
  m.rewards = last_rewards_;
  return m;
}

MatrixOptimum brute_force_optimum(const MatrixGame& game) {
  MatrixOptimum best;
  bool first = true;
  for (std::size_t j = 0; j < game.payoff().size(); ++j) {
    const auto& row = game.payoff()[j];
    const double v = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size());
    if (first || v > best.value) {
      best = {j, v, true};
      first = false;
    } else if (v == best.value) {
      best.unique = false;
    }
  }
  return best;
}

}  // namespace tsc::env
