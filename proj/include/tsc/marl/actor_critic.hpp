#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tsc/marl/hyperparameters.hpp"
#include "tsc/marl/replay_buffer.hpp"
#include "tsc/net/mlp.hpp"
#include "tsc/net/optim.hpp"

namespace tsc::marl {

/// Widths of the per-agent observation and action blocks inside the global
/// state x and the joint action vector.
struct JointLayout {
  std::vector<std::size_t> observation_widths;
  std::vector<std::size_t> action_counts;

  std::size_t agents() const { return observation_widths.size(); }
  std::size_t state_width() const;
  std::size_t action_width() const;
  std::size_t observation_offset(std::size_t agent) const;
  std::size_t action_offset(std::size_t agent) const;

  friend bool operator==(const JointLayout&, const JointLayout&) = default;
};

/// Which inputs an agent's critic sees: everything (x, a_1..a_N) or only its
/// own (o_i, a_i).
enum class CriticScope { centralized, local };

/// obs -> fc1 -> fc2 -> P (leaky ReLU each), batch norm, P -> P softmax.
std::vector<net::LayerSpec> actor_layers(std::size_t observation_width, std::size_t phases, std::size_t fc1,
                                         std::size_t fc2);
/// in -> fc1 -> fc2 (leaky ReLU) -> 1 linear.
std::vector<net::LayerSpec> critic_layers(std::size_t input_width, std::size_t fc1, std::size_t fc2);

std::size_t critic_input_width(const JointLayout& layout, CriticScope scope, std::size_t agent);

/// Actor, critic, their target copies and optimizer states.
struct DdpgPair {
  net::Mlp actor, critic, actor_target, critic_target;
  net::AdamState actor_opt, critic_opt;

  DdpgPair(net::Mlp actor_net, net::Mlp critic_net);

  void write(net::ByteWriter& w) const;
  static DdpgPair read(net::ByteReader& r);
  friend bool operator==(const DdpgPair&, const DdpgPair&) = default;
};

struct ActionChoice {
  std::vector<double> action;  // point on the simplex over phases
  int phase = 0;               // argmax, lowest index on ties
};

/// Infer-mode actor pass; with explore, N(0, sigma^2) noise on the logits.
ActionChoice select_action(const net::Mlp& actor, std::span<const double> observation, bool explore, double sigma,
                           Rng& rng);

int argmax(std::span<const double> v);

/// Columns [offset, offset + width) of m.
net::Matrix columns(const net::Matrix& m, std::size_t offset, std::size_t width);

/// Critic input rows for agent i built from stored global states and joint actions.
net::Matrix critic_input(const JointLayout& layout, CriticScope scope, std::size_t agent, const net::Matrix& states,
                         const net::Matrix& actions);

/// y = r_i + gamma * Q'_i(x', mu'_1(o'_1), ..., mu'_N(o'_N)), noise free, bootstrapping on every sample.
/// target_actors[k] is agent k's target actor (only the agent's own is read for a local critic).
std::vector<double> compute_targets(const JointLayout& layout, CriticScope scope, std::size_t agent,
                                    std::span<const net::Mlp* const> target_actors, const net::Mlp& target_critic,
                                    const Minibatch& batch, double gamma);

/// One Adam step on the mean squared error; returns the loss before the step.
double critic_update(DdpgPair& pair, const net::Matrix& critic_in, std::span<const double> targets,
                     const Hyperparameters& hp);

/// Policy-gradient step for one agent: its action columns in critic_in are
/// replaced by the actor's output on `observations`, the other columns stay
/// as replayed. grad_scale multiplies the actor gradient (1/K for ensembles).
/// Returns the gradient norm before clipping.
double actor_update(DdpgPair& pair, const net::Matrix& observations, net::Matrix critic_in, std::size_t action_column,
                    const Hyperparameters& hp, double grad_scale);

}  // namespace tsc::marl
