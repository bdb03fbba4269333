#include "tsc/marl/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tsc/errors.hpp"

namespace tsc::marl {

using net::Matrix;

std::size_t joint_action_count(std::span<const std::size_t> action_counts, std::size_t limit) {
  std::size_t n = 1;
  for (std::size_t p : action_counts) {
    if (p == 0) throw ConfigError("every intersection needs at least one phase");
    if (n > limit / p) throw ConfigError("joint action space exceeds the limit of " + std::to_string(limit));
    n *= p;
  }
  if (n > limit) throw ConfigError("joint action space exceeds the limit of " + std::to_string(limit));
  return n;
}

CentralizedDqn::CentralizedDqn(JointLayout layout, Hyperparameters hp, std::uint64_t seed,
                               std::int64_t total_training_steps)
    : layout_(std::move(layout)),
      hp_(hp),
      joint_actions_(joint_action_count(layout_.action_counts, hp.joint_action_limit)),
      total_steps_(total_training_steps),
      q_({{layout_.state_width(), hp.fc1, net::Activation::leaky_relu, false},
          {hp.fc1, hp.fc2, net::Activation::leaky_relu, false},
          {hp.fc2, joint_actions_, net::Activation::linear, false}},
         derive_seed(seed, 3)),
      q_target_(q_),
      opt_(q_.parameter_count()),
      buffer_(hp.buffer_capacity, layout_.state_width(), 1, 1) {
  hp_.validate();
  if (total_steps_ <= 0) throw ConfigError("DQN needs a positive number of training steps");
}

std::vector<int> CentralizedDqn::decode(std::size_t joint) const {
  if (joint >= joint_actions_) throw SimulationError("joint action out of range");
  std::vector<int> phases(layout_.agents());
  for (std::size_t i = layout_.agents(); i-- > 0;) {
    phases[i] = static_cast<int>(joint % layout_.action_counts[i]);
    joint /= layout_.action_counts[i];
  }
  return phases;
}

std::size_t CentralizedDqn::encode(std::span<const int> phases) const {
  if (phases.size() != layout_.agents()) throw SimulationError("one phase per intersection required");
  std::size_t joint = 0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (phases[i] < 0 || static_cast<std::size_t>(phases[i]) >= layout_.action_counts[i])
      throw SimulationError("phase out of range");
    joint = joint * layout_.action_counts[i] + static_cast<std::size_t>(phases[i]);
  }
  return joint;
}

double CentralizedDqn::epsilon_at(std::int64_t step) const {
  const double horizon = hp_.epsilon_fraction * static_cast<double>(total_steps_);
  const double frac = static_cast<double>(step) / horizon;
  if (frac >= 1.0) return hp_.epsilon_end;
  return hp_.epsilon_start + frac * (hp_.epsilon_end - hp_.epsilon_start);
}

double CentralizedDqn::epsilon() const { return epsilon_at(steps_); }

std::size_t CentralizedDqn::greedy(std::span<const double> state) const {
  if (state.size() != layout_.state_width()) throw ShapeError("state width does not match the Q-network");
  const Matrix q = net::predict(q_, Matrix::from_row(state));
  return static_cast<std::size_t>(argmax(q.data));
}

std::size_t CentralizedDqn::act(std::span<const double> state, bool explore, Rng& rng) {
  if (!explore) return greedy(state);
  const double eps = epsilon();
  ++steps_;
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < eps)
    return std::uniform_int_distribution<std::size_t>(0, joint_actions_ - 1)(rng);
  return greedy(state);
}

void CentralizedDqn::store(std::span<const double> state, std::size_t joint, double reward,
                           std::span<const double> next_state, std::int64_t step_index) {
  buffer_.store({{state.begin(), state.end()},
                 {static_cast<double>(joint)},
                 {reward},
                 {next_state.begin(), next_state.end()},
                 step_index});
}

std::vector<double> CentralizedDqn::compute_targets(const Minibatch& batch) const {
  const Matrix next_q = net::predict(q_target_, batch.next_state);
  std::vector<double> y(batch.state.rows);
  for (std::size_t b = 0; b < y.size(); ++b) {
    const auto row = next_q.row(b);
    y[b] = batch.rewards(b, 0) + hp_.gamma * *std::max_element(row.begin(), row.end());
  }
  return y;
}

std::optional<UpdateStats> CentralizedDqn::train_step(std::int64_t step_index, Rng& rng) {
  if (step_index % static_cast<std::int64_t>(hp_.learn_every) != 0) return std::nullopt;
  if (buffer_.size() < hp_.learning_starts()) return std::nullopt;
  const Minibatch batch = buffer_.sample(hp_.batch_size, rng);
  const std::vector<double> y = compute_targets(batch);

  net::ForwardCache cache = net::forward(q_, batch.state, net::Mode::train);
  const std::size_t n = batch.state.rows;
  Matrix upstream(n, joint_actions_);
  double loss = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const auto a = static_cast<std::size_t>(batch.actions(b, 0));
    const double err = cache.output()(b, a) - y[b];
    loss += err * err;
    upstream(b, a) = 2.0 * err / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);
  if (!std::isfinite(loss)) throw DivergenceError("DQN loss is not finite");
  net::GradBundle grads = net::backward(q_, cache, upstream);
  UpdateStats stats;
  stats.trained = true;
  stats.critic_loss = loss;
  stats.actor_grad_norm = net::global_norm(grads);
  if (hp_.clip_gradients) net::clip_global_norm(grads, hp_.clip_norm);
  net::adam_step(opt_, q_, grads, hp_.critic_lr, hp_.weight_decay);
  net::soft_update(q_target_, q_, hp_.tau);
  return stats;
}

void CentralizedDqn::write(net::ByteWriter& w) const {
  w.blob(net::serialize(q_));
  w.blob(net::serialize(q_target_));
  net::write_adam(w, opt_);
  w.u64(static_cast<std::uint64_t>(steps_));
  buffer_.write(w);
}

void CentralizedDqn::read(net::ByteReader& r) {
  net::Mlp q = net::deserialize(r.blob());
  net::Mlp target = net::deserialize(r.blob());
  if (!q.same_structure(q_) || !target.same_structure(q_)) throw DecodeError("checkpoint Q-network shape mismatch");
  net::AdamState opt = net::read_adam(r);
  if (opt.first_moment.size() != q.parameter_count()) throw DecodeError("checkpoint optimizer shape mismatch");
  const auto steps = static_cast<std::int64_t>(r.u64());
  ReplayBuffer buf = ReplayBuffer::read(r);
  if (buf.capacity() != buffer_.capacity() || buf.state_width() != buffer_.state_width())
    throw DecodeError("checkpoint replay buffer mismatch");
  q_ = std::move(q);
  q_target_ = std::move(target);
  opt_ = std::move(opt);
  steps_ = steps;
  buffer_ = std::move(buf);
}

FixedTimeSchedule FixedTimeSchedule::uniform(std::span<const std::size_t> phase_counts, int green_seconds) {
  FixedTimeSchedule s;
  for (std::size_t p : phase_counts) s.green.emplace_back(p, green_seconds);
  s.validate();
  return s;
}

void FixedTimeSchedule::validate() const {
  for (const auto& g : green) {
    if (g.empty()) throw ConfigError("fixed-time plan needs at least one phase");
    for (int d : g)
      if (d <= 0) throw ConfigError("fixed-time green durations must be positive");
  }
}

int FixedTimeSchedule::phase(std::size_t intersection, std::int64_t t) const {
  const auto& g = green.at(intersection);
  const std::int64_t cycle = std::accumulate(g.begin(), g.end(), std::int64_t{0});
  std::int64_t within = t % cycle;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (within < g[p]) return static_cast<int>(p);
    within -= g[p];
  }
  return static_cast<int>(g.size()) - 1;  // unreachable
}

std::vector<int> FixedTimeSchedule::actions(std::int64_t t) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < green.size(); ++i) out.push_back(phase(i, t));
  return out;
}

}  // namespace tsc::marl
