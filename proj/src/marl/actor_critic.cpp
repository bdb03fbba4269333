#include "tsc/marl/actor_critic.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "tsc/errors.hpp"

namespace tsc::marl {

using net::Activation;
using net::LayerSpec;
using net::Matrix;
using net::Mlp;
using net::Mode;

std::size_t JointLayout::state_width() const {
  return std::accumulate(observation_widths.begin(), observation_widths.end(), std::size_t{0});
}
std::size_t JointLayout::action_width() const {
  return std::accumulate(action_counts.begin(), action_counts.end(), std::size_t{0});
}
std::size_t JointLayout::observation_offset(std::size_t agent) const {
  return std::accumulate(observation_widths.begin(), observation_widths.begin() + static_cast<std::ptrdiff_t>(agent),
                         std::size_t{0});
}
std::size_t JointLayout::action_offset(std::size_t agent) const {
  return std::accumulate(action_counts.begin(), action_counts.begin() + static_cast<std::ptrdiff_t>(agent),
                         std::size_t{0});
}

std::vector<LayerSpec> actor_layers(std::size_t obs, std::size_t phases, std::size_t fc1, std::size_t fc2) {
  return {{obs, fc1, Activation::leaky_relu, false},
          {fc1, fc2, Activation::leaky_relu, false},
          {fc2, phases, Activation::leaky_relu, false},
          {phases, phases, Activation::softmax, true}};
}

std::vector<LayerSpec> critic_layers(std::size_t in, std::size_t fc1, std::size_t fc2) {
  return {{in, fc1, Activation::leaky_relu, false},
          {fc1, fc2, Activation::leaky_relu, false},
          {fc2, 1, Activation::linear, false}};
}

std::size_t critic_input_width(const JointLayout& layout, CriticScope scope, std::size_t agent) {
  if (scope == CriticScope::centralized) return layout.state_width() + layout.action_width();
  return layout.observation_widths[agent] + layout.action_counts[agent];
}

DdpgPair::DdpgPair(Mlp actor_net, Mlp critic_net)
    : actor(std::move(actor_net)),
      critic(std::move(critic_net)),
      actor_target(actor),
      critic_target(critic),
      actor_opt(actor.parameter_count()),
      critic_opt(critic.parameter_count()) {}

void DdpgPair::write(net::ByteWriter& w) const {
  for (const Mlp* m : {&actor, &critic, &actor_target, &critic_target}) w.blob(net::serialize(*m));
  net::write_adam(w, actor_opt);
  net::write_adam(w, critic_opt);
}

DdpgPair DdpgPair::read(net::ByteReader& r) {
  Mlp nets[4];
  for (Mlp& m : nets) m = net::deserialize(r.blob());
  DdpgPair p(nets[0], nets[1]);
  p.actor_target = std::move(nets[2]);
  p.critic_target = std::move(nets[3]);
  p.actor_opt = net::read_adam(r);
  p.critic_opt = net::read_adam(r);
  if (!p.actor.same_structure(p.actor_target) || !p.critic.same_structure(p.critic_target) ||
      p.actor_opt.first_moment.size() != p.actor.parameter_count() ||
      p.critic_opt.first_moment.size() != p.critic.parameter_count())
    throw DecodeError("actor-critic record is inconsistent");
  return p;
}

int argmax(std::span<const double> v) {
  int best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  return best;
}

ActionChoice select_action(const Mlp& actor, std::span<const double> observation, bool explore, double sigma,
                           Rng& rng) {
  if (observation.size() != actor.input_width())
    throw ShapeError("observation width " + std::to_string(observation.size()) + " does not match actor input " +
                     std::to_string(actor.input_width()));
  Matrix logits = net::predict_logits(actor, Matrix::from_row(observation));
  if (explore) {
    std::normal_distribution<double> unit(0.0, 1.0);
    for (double& z : logits.data) z += sigma * unit(rng);
  }
  net::softmax_rows(logits);
  ActionChoice out;
  out.action = logits.data;
  out.phase = argmax(out.action);
  return out;
}

Matrix columns(const Matrix& m, std::size_t offset, std::size_t width) {
  if (offset + width > m.cols) throw ShapeError("column slice out of range");
  Matrix out(m.rows, width);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < width; ++c) out(r, c) = m(r, offset + c);
  return out;
}

namespace {

Matrix hconcat(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw ShapeError("row count mismatch in concatenation");
  Matrix out(a.rows, a.cols + b.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    std::copy(a.row(r).begin(), a.row(r).end(), out.row(r).begin());
    std::copy(b.row(r).begin(), b.row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(a.cols));
  }
  return out;
}

void put_columns(Matrix& dst, std::size_t offset, const Matrix& src) {
  if (src.rows != dst.rows || offset + src.cols > dst.cols) throw ShapeError("column block out of range");
  for (std::size_t r = 0; r < src.rows; ++r)
    for (std::size_t c = 0; c < src.cols; ++c) dst(r, offset + c) = src(r, c);
}

}  // namespace

Matrix critic_input(const JointLayout& layout, CriticScope scope, std::size_t agent, const Matrix& states,
                    const Matrix& actions) {
  if (states.cols != layout.state_width() || actions.cols != layout.action_width())
    throw ShapeError("stored widths do not match the joint layout");
  if (scope == CriticScope::centralized) return hconcat(states, actions);
  return hconcat(columns(states, layout.observation_offset(agent), layout.observation_widths[agent]),
                 columns(actions, layout.action_offset(agent), layout.action_counts[agent]));
}

std::vector<double> compute_targets(const JointLayout& layout, CriticScope scope, std::size_t agent,
                                    std::span<const Mlp* const> target_actors, const Mlp& target_critic,
                                    const Minibatch& batch, double gamma) {
  const std::size_t n = batch.state.rows;
  Matrix next_actions(n, layout.action_width());
  for (std::size_t k = 0; k < layout.agents(); ++k) {
    if (scope == CriticScope::local && k != agent) continue;
    const Matrix obs = columns(batch.next_state, layout.observation_offset(k), layout.observation_widths[k]);
    put_columns(next_actions, layout.action_offset(k), net::predict(*target_actors[k], obs));
  }
  const Matrix q = net::predict(target_critic, critic_input(layout, scope, agent, batch.next_state, next_actions));
  std::vector<double> y(n);
  for (std::size_t b = 0; b < n; ++b) y[b] = batch.rewards(b, agent) + gamma * q(b, 0);
  return y;
}

double critic_update(DdpgPair& pair, const Matrix& critic_in, std::span<const double> targets,
                     const Hyperparameters& hp) {
  const std::size_t n = critic_in.rows;
  if (targets.size() != n) throw ShapeError("one target per sample required");
  net::ForwardCache cache = net::forward(pair.critic, critic_in, Mode::train);
  const Matrix& q = cache.output();
  Matrix upstream(n, 1);
  double loss = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    const double err = q(b, 0) - targets[b];
    loss += err * err;
    upstream(b, 0) = 2.0 * err / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);
  if (!std::isfinite(loss)) throw DivergenceError("critic loss is not finite");
  net::GradBundle grads = net::backward(pair.critic, cache, upstream);
  if (hp.clip_gradients) net::clip_global_norm(grads, hp.clip_norm);
  net::adam_step(pair.critic_opt, pair.critic, grads, hp.critic_lr, hp.weight_decay);
  return loss;
}

double actor_update(DdpgPair& pair, const Matrix& observations, Matrix critic_in, std::size_t action_column,
                    const Hyperparameters& hp, double grad_scale) {
  const std::size_t n = observations.rows;
  const std::size_t phases = pair.actor.output_width();
  net::ForwardCache actor_cache = net::forward(pair.actor, observations, Mode::train);
  put_columns(critic_in, action_column, actor_cache.output());

  net::ForwardCache critic_cache = net::forward(pair.critic, critic_in, Mode::infer);
  // Ascent on mean Q is descent on -mean Q.
  const Matrix upstream(n, 1, -1.0 / static_cast<double>(n));
  const net::GradBundle critic_grads = net::backward(pair.critic, critic_cache, upstream);
  Matrix action_grad = columns(critic_grads.input, action_column, phases);
  for (double& g : action_grad.data) g *= grad_scale;

  net::GradBundle grads = net::backward(pair.actor, actor_cache, action_grad);
  const double norm = net::global_norm(grads);
  if (!std::isfinite(norm)) throw DivergenceError("actor gradient is not finite");
  if (hp.clip_gradients) net::clip_global_norm(grads, hp.clip_norm);
  net::adam_step(pair.actor_opt, pair.actor, grads, hp.actor_lr, hp.weight_decay);
  return norm;
}

}  // namespace tsc::marl
