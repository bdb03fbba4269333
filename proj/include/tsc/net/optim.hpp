#pragma once

#include <cstdint>
#include <vector>

#include "tsc/net/mlp.hpp"

namespace tsc::net {

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t parameter_count)
      : first_moment(parameter_count, 0.0), second_moment(parameter_count, 0.0) {}

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// L2 norm over all parameter gradients (input gradient excluded).
double global_norm(const GradBundle& grads);

/// Rescales parameter gradients so their global norm is at most max_norm.
/// Throws DivergenceError on NaN/Inf gradients.
void clip_global_norm(GradBundle& grads, double max_norm);

/// One bias-corrected Adam step; l2_decay adds decay * theta to the gradient
/// before the moment updates.
void adam_step(AdamState& state, Mlp& net, const GradBundle& grads, double lr, double l2_decay);

/// target <- tau * source + (1 - tau) * target, parameters and batch-norm
/// running statistics alike.
void soft_update(Mlp& target, const Mlp& source, double tau);

}  // namespace tsc::net
