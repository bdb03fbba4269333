#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "tsc/env/markov_game.hpp"
#include "tsc/harness/config.hpp"
#include "tsc/marl/dqn.hpp"
#include "tsc/marl/maddpg.hpp"

namespace tsc::harness {

using Observations = std::vector<std::vector<double>>;

struct Decision {
  std::vector<int> phases;     // executed, one per agent
  std::vector<double> actions; // stored action vectors, concatenated (actor-critic only)
  std::size_t joint = 0;       // DQN joint index
};

/// Uniform face over the four algorithms so the run loop treats them alike.
class Controller {
 public:
  virtual ~Controller() = default;

  virtual void begin_episode(marl::Rng& rng) { (void)rng; }
  virtual Decision decide(const Observations& obs, std::int64_t t, bool explore, marl::Rng& rng) = 0;
  /// rewards are already multiplied by r_c.
  virtual void record(const Observations& obs, const Decision& d, std::span<const double> rewards,
                      const Observations& next, std::int64_t t) {
    (void)obs, (void)d, (void)rewards, (void)next, (void)t;
  }
  /// Returns true when a parameter update happened.
  virtual bool learn(std::int64_t t, marl::Rng& rng) {
    (void)t, (void)rng;
    return false;
  }
  std::int64_t updates() const { return updates_; }

  /// Learnable state, optimizer state, buffers and counters.
  virtual void write(net::ByteWriter& w) const;
  virtual void read(net::ByteReader& r);

 protected:
  std::int64_t updates_ = 0;
};

class ActorCriticController final : public Controller {
 public:
  ActorCriticController(marl::JointLayout layout, const marl::Hyperparameters& hp, marl::CriticScope scope,
                        std::uint64_t seed);
  void begin_episode(marl::Rng& rng) override;
  Decision decide(const Observations& obs, std::int64_t t, bool explore, marl::Rng& rng) override;
  void record(const Observations& obs, const Decision& d, std::span<const double> rewards, const Observations& next,
              std::int64_t t) override;
  bool learn(std::int64_t t, marl::Rng& rng) override;
  void write(net::ByteWriter& w) const override;
  void read(net::ByteReader& r) override;

  marl::ActorCriticLearner& learner() { return learner_; }
  const marl::ActorCriticLearner& learner() const { return learner_; }

 private:
  marl::ActorCriticLearner learner_;
};

class DqnController final : public Controller {
 public:
  DqnController(marl::JointLayout layout, const marl::Hyperparameters& hp, std::uint64_t seed,
                std::int64_t total_training_steps);
  Decision decide(const Observations& obs, std::int64_t t, bool explore, marl::Rng& rng) override;
  void record(const Observations& obs, const Decision& d, std::span<const double> rewards, const Observations& next,
              std::int64_t t) override;
  bool learn(std::int64_t t, marl::Rng& rng) override;
  void write(net::ByteWriter& w) const override;
  void read(net::ByteReader& r) override;

  const marl::CentralizedDqn& dqn() const { return dqn_; }

 private:
  marl::CentralizedDqn dqn_;
};

class FixedTimeController final : public Controller {
 public:
  explicit FixedTimeController(marl::FixedTimeSchedule schedule);
  Decision decide(const Observations& obs, std::int64_t t, bool explore, marl::Rng& rng) override;

 private:
  marl::FixedTimeSchedule schedule_;
};

marl::JointLayout layout_of(const env::MarkovGame& game);
std::vector<double> concat(const Observations& obs);

/// Environment described by the config (fresh, not yet reset).
std::unique_ptr<env::MarkovGame> make_environment(const ExperimentConfig& config);
/// Controller for config.algorithm with networks seeded from config.seed.
std::unique_ptr<Controller> make_controller(const ExperimentConfig& config, const env::MarkovGame& game);

}  // namespace tsc::harness
