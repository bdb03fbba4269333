#include "tsc/net/optim.hpp"

#include <cmath>
#include <string>

#include "tsc/errors.hpp"

namespace tsc::net {

double global_norm(const GradBundle& grads) {
  double sq = 0.0;
  for (double g : grads.parameters) sq += g * g;
  return std::sqrt(sq);
}

void clip_global_norm(GradBundle& grads, double max_norm) {
  if (!(max_norm > 0.0)) throw ShapeError("clip threshold must be positive");
  const double norm = global_norm(grads);
  if (!std::isfinite(norm)) throw DivergenceError("non-finite gradient norm");
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (double& g : grads.parameters) g *= scale;
}

void adam_step(AdamState& state, Mlp& net, const GradBundle& grads, double lr, double l2_decay) {
  grads.check_congruent(net);
  auto params = net.parameters();
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size())
    throw ShapeError("optimizer state does not match network");

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  bool finite = true;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads.parameters[k] + l2_decay * params[k];
    double& m = state.first_moment[k];
    double& v = state.second_moment[k];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    params[k] -= lr * (m / c1) / (std::sqrt(v / c2) + state.eps_hat);
    finite = finite && std::isfinite(params[k]);
  }
  if (!finite) throw DivergenceError("Adam step produced a non-finite parameter");
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  if (!target.same_structure(source)) throw ShapeError("soft update between different architectures");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ShapeError("tau must lie in [0, 1], got " + std::to_string(tau));
  const double keep = 1.0 - tau;
  auto dst = target.parameters();
  auto src = source.parameters();
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = tau * src[k] + keep * dst[k];

  auto& tbn = target.batch_norm();
  const auto& sbn = source.batch_norm();
  for (std::size_t l = 0; l < tbn.size(); ++l) {
    if (!tbn[l]) continue;
    for (std::size_t c = 0; c < tbn[l]->running_mean.size(); ++c) {
      tbn[l]->running_mean[c] = tau * sbn[l]->running_mean[c] + keep * tbn[l]->running_mean[c];
      tbn[l]->running_var[c] = tau * sbn[l]->running_var[c] + keep * tbn[l]->running_var[c];
    }
  }
}

}  // namespace tsc::net
