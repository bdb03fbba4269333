#include "tsc/harness/controller.hpp"

#include "tsc/env/matrix_game.hpp"
#include "tsc/env/traffic_env.hpp"
#include "tsc/errors.hpp"

namespace tsc::harness {

void Controller::write(net::ByteWriter& w) const { w.u64(static_cast<std::uint64_t>(updates_)); }
void Controller::read(net::ByteReader& r) { updates_ = static_cast<std::int64_t>(r.u64()); }

std::vector<double> concat(const Observations& obs) {
  std::vector<double> out;
  for (const auto& o : obs) out.insert(out.end(), o.begin(), o.end());
  return out;
}

marl::JointLayout layout_of(const env::MarkovGame& game) {
  marl::JointLayout layout;
  for (std::size_t i = 0; i < game.agent_count(); ++i) {
    layout.observation_widths.push_back(game.observation_width(i));
    layout.action_counts.push_back(game.action_count(i));
  }
  return layout;
}

ActorCriticController::ActorCriticController(marl::JointLayout layout, const marl::Hyperparameters& hp,
                                             marl::CriticScope scope, std::uint64_t seed)
    : learner_(std::move(layout), hp, scope, seed) {}

void ActorCriticController::begin_episode(marl::Rng& rng) { learner_.begin_episode(rng); }

Decision ActorCriticController::decide(const Observations& obs, std::int64_t, bool explore, marl::Rng& rng) {
  Decision d;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    marl::ActionChoice c = learner_.act(i, obs[i], explore, rng);
    d.phases.push_back(c.phase);
    d.actions.insert(d.actions.end(), c.action.begin(), c.action.end());
  }
  return d;
}

void ActorCriticController::record(const Observations& obs, const Decision& d, std::span<const double> rewards,
                                   const Observations& next, std::int64_t t) {
  learner_.store({concat(obs), d.actions, {rewards.begin(), rewards.end()}, concat(next), t});
}

bool ActorCriticController::learn(std::int64_t t, marl::Rng& rng) {
  if (!learner_.train_step(t, rng)) return false;
  ++updates_;
  return true;
}

void ActorCriticController::write(net::ByteWriter& w) const {
  Controller::write(w);
  learner_.write(w);
}

void ActorCriticController::read(net::ByteReader& r) {
  Controller::read(r);
  learner_.read(r);
}

DqnController::DqnController(marl::JointLayout layout, const marl::Hyperparameters& hp, std::uint64_t seed,
                             std::int64_t total_training_steps)
    : dqn_(std::move(layout), hp, seed, total_training_steps) {}

Decision DqnController::decide(const Observations& obs, std::int64_t, bool explore, marl::Rng& rng) {
  Decision d;
  d.joint = dqn_.act(concat(obs), explore, rng);
  d.phases = dqn_.decode(d.joint);
  return d;
}

void DqnController::record(const Observations& obs, const Decision& d, std::span<const double> rewards,
                           const Observations& next, std::int64_t t) {
  double sum = 0.0;
  for (double r : rewards) sum += r;
  dqn_.store(concat(obs), d.joint, sum, concat(next), t);
}

bool DqnController::learn(std::int64_t t, marl::Rng& rng) {
  if (!dqn_.train_step(t, rng)) return false;
  ++updates_;
  return true;
}

void DqnController::write(net::ByteWriter& w) const {
  Controller::write(w);
  dqn_.write(w);
}

void DqnController::read(net::ByteReader& r) {
  Controller::read(r);
  dqn_.read(r);
}

FixedTimeController::FixedTimeController(marl::FixedTimeSchedule schedule) : schedule_(std::move(schedule)) {
  schedule_.validate();
}

Decision FixedTimeController::decide(const Observations&, std::int64_t t, bool, marl::Rng&) {
  Decision d;
  d.phases = schedule_.actions(t);
  return d;
}

std::unique_ptr<env::MarkovGame> make_environment(const ExperimentConfig& config) {
  const env::Fixture& fx = config.fixture;
  if (fx.is_matrix()) return std::make_unique<env::MatrixGame>(fx.matrix->payoff, fx.matrix->agents, fx.matrix->actions);
  return std::make_unique<env::TrafficEnv>(*fx.network, fx.demand, fx.weights, config.seed, config.horizon);
}

std::unique_ptr<Controller> make_controller(const ExperimentConfig& config, const env::MarkovGame& game) {
  const marl::JointLayout layout = layout_of(game);
  switch (config.algorithm) {
    case Algorithm::maddpg:
      return std::make_unique<ActorCriticController>(layout, config.hp, marl::CriticScope::centralized, config.seed);
    case Algorithm::ddpg:
      return std::make_unique<ActorCriticController>(layout, config.hp, marl::CriticScope::local, config.seed);
    case Algorithm::dqn:
      return std::make_unique<DqnController>(layout, config.hp, config.seed,
                                             static_cast<std::int64_t>(config.episodes) * game.horizon());
    case Algorithm::fixed:
      return std::make_unique<FixedTimeController>(
          marl::FixedTimeSchedule::uniform(layout.action_counts, config.fixed_time_green));
  }
  throw ConfigError("unknown algorithm");
}

}  // namespace tsc::harness
