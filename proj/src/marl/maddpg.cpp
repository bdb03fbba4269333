#include "tsc/marl/maddpg.hpp"

#include "tsc/errors.hpp"

namespace tsc::marl {

ActorCriticLearner::ActorCriticLearner(JointLayout layout, Hyperparameters hp, CriticScope scope, std::uint64_t seed)
    : layout_(std::move(layout)), hp_(hp), scope_(scope) {
  hp_.validate();
  if (layout_.agents() == 0 || layout_.action_counts.size() != layout_.agents())
    throw ShapeError("joint layout needs one observation width and action count per agent");
  std::shared_ptr<ReplayBuffer> shared;
  if (shared_buffer())
    shared = std::make_shared<ReplayBuffer>(hp_.buffer_capacity, layout_.state_width(), layout_.action_width(),
                                            layout_.agents());
  for (std::size_t i = 0; i < layout_.agents(); ++i) {
    MaddpgAgent agent;
    agent.index = i;
    for (std::size_t k = 0; k < hp_.ensemble_size; ++k) {
      net::Mlp actor(actor_layers(layout_.observation_widths[i], layout_.action_counts[i], hp_.fc1, hp_.fc2),
                     derive_seed(seed, 1, i, k));
      net::Mlp critic(critic_layers(critic_input_width(layout_, scope_, i), hp_.fc1, hp_.fc2),
                      derive_seed(seed, 2, i, k));
      agent.ensemble.emplace_back(std::move(actor), std::move(critic));
      agent.buffers.push_back(shared ? shared
                                     : std::make_shared<ReplayBuffer>(hp_.buffer_capacity, layout_.state_width(),
                                                                      layout_.action_width(), layout_.agents()));
    }
    agents_.push_back(std::move(agent));
  }
}

std::size_t ActorCriticLearner::select_subpolicy(std::size_t agent, Rng& rng) {
  MaddpgAgent& a = agents_.at(agent);
  a.active = hp_.ensemble_size == 1 ? 0 : std::uniform_int_distribution<std::size_t>(0, hp_.ensemble_size - 1)(rng);
  return a.active;
}

void ActorCriticLearner::begin_episode(Rng& rng) {
  for (std::size_t i = 0; i < agents_.size(); ++i) select_subpolicy(i, rng);
}

ActionChoice ActorCriticLearner::act(std::size_t agent, std::span<const double> observation, bool explore,
                                     Rng& rng) const {
  return select_action(agents_.at(agent).policy().actor, observation, explore, hp_.noise_std, rng);
}

void ActorCriticLearner::store(const Transition& t) {
  if (shared_buffer()) {
    agents_.front().buffer().store(t);
    return;
  }
  for (MaddpgAgent& a : agents_) a.buffer().store(t);
}

std::optional<std::vector<UpdateStats>> ActorCriticLearner::train_step(std::int64_t step_index, Rng& rng) {
  if (step_index % static_cast<std::int64_t>(hp_.learn_every) != 0) return std::nullopt;

  std::vector<const net::Mlp*> target_actors;
  for (const MaddpgAgent& a : agents_) target_actors.push_back(&a.policy().actor_target);

  std::vector<UpdateStats> stats(agents_.size());
  bool any = false;
  const double grad_scale = 1.0 / static_cast<double>(hp_.ensemble_size);
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    MaddpgAgent& agent = agents_[i];
    if (agent.buffer().size() < hp_.learning_starts()) continue;
    DdpgPair& pair = agent.policy();
    const Minibatch batch = agent.buffer().sample(hp_.batch_size, rng);
    const std::vector<double> y =
        compute_targets(layout_, scope_, i, target_actors, pair.critic_target, batch, hp_.gamma);
    const net::Matrix critic_in = critic_input(layout_, scope_, i, batch.state, batch.actions);
    stats[i].critic_loss = critic_update(pair, critic_in, y, hp_);
    const net::Matrix obs = columns(batch.state, layout_.observation_offset(i), layout_.observation_widths[i]);
    const std::size_t column = scope_ == CriticScope::centralized
                                   ? layout_.state_width() + layout_.action_offset(i)
                                   : layout_.observation_widths[i];
    stats[i].actor_grad_norm = actor_update(pair, obs, critic_in, column, hp_, grad_scale);
    stats[i].trained = any = true;
  }
  if (!any) return std::nullopt;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (!stats[i].trained) continue;
    DdpgPair& pair = agents_[i].policy();
    net::soft_update(pair.actor_target, pair.actor, hp_.tau);
    net::soft_update(pair.critic_target, pair.critic, hp_.tau);
  }
  return stats;
}

void ActorCriticLearner::write(net::ByteWriter& w) const {
  w.u32(static_cast<std::uint32_t>(agents_.size()));
  w.u32(static_cast<std::uint32_t>(hp_.ensemble_size));
  w.u8(shared_buffer() ? 1 : 0);
  for (const MaddpgAgent& a : agents_) {
    w.u32(static_cast<std::uint32_t>(a.active));
    for (const DdpgPair& p : a.ensemble) p.write(w);
  }
  if (shared_buffer()) {
    agents_.front().buffers.front()->write(w);
  } else {
    for (const MaddpgAgent& a : agents_)
      for (const auto& b : a.buffers) b->write(w);
  }
}

void ActorCriticLearner::read(net::ByteReader& r) {
  if (r.u32() != agents_.size() || r.u32() != hp_.ensemble_size || (r.u8() == 1) != shared_buffer())
    throw DecodeError("checkpoint learner shape does not match the configuration");
  for (MaddpgAgent& a : agents_) {
    a.active = r.u32();
    if (a.active >= hp_.ensemble_size) throw DecodeError("active sub-policy out of range");
    for (DdpgPair& p : a.ensemble) {
      DdpgPair loaded = DdpgPair::read(r);
      if (!loaded.actor.same_structure(p.actor) || !loaded.critic.same_structure(p.critic))
        throw DecodeError("checkpoint network shapes do not match the configuration");
      p = std::move(loaded);
    }
  }
  const auto load = [&](std::shared_ptr<ReplayBuffer>& dst) {
    ReplayBuffer b = ReplayBuffer::read(r);
    if (b.capacity() != dst->capacity() || b.state_width() != dst->state_width() ||
        b.action_width() != dst->action_width() || b.reward_width() != dst->reward_width())
      throw DecodeError("checkpoint replay buffer does not match the configuration");
    *dst = std::move(b);
  };
  if (shared_buffer()) {
    load(agents_.front().buffers.front());
  } else {
    for (MaddpgAgent& a : agents_)
      for (auto& b : a.buffers) load(b);
  }
}

}  // namespace tsc::marl
