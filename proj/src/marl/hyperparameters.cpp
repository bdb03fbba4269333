#include "tsc/marl/hyperparameters.hpp"

#include <cmath>
#include <string>

#include "tsc/errors.hpp"

namespace tsc::marl {

namespace {
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ a);
  h = mix(h ^ b);
  return mix(h ^ c);
}

void Hyperparameters::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("hyperparameters: " + m); };
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(std::string(name) + " must be positive");
  };
  if (buffer_capacity == 0) fail("buffer_capacity must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (batch_size > buffer_capacity) fail("batch_size must not exceed buffer_capacity");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must lie in [0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) fail("tau must lie in (0, 1]");
  positive(actor_lr, "actor_lr");
  positive(critic_lr, "critic_lr");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) fail("weight_decay must be >= 0");
  positive(reward_scale, "reward_scale");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) fail("noise_std must be >= 0");
  if (learn_every == 0) fail("learn_every must be positive");
  positive(clip_norm, "clip_norm");
  if (fc1 == 0 || fc2 == 0) fail("hidden widths must be positive");
  if (ensemble_size == 0) fail("ensemble_size must be positive");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0) || !(epsilon_end >= 0.0 && epsilon_end <= 1.0))
    fail("epsilon bounds must lie in [0, 1]");
  if (!(epsilon_fraction > 0.0 && epsilon_fraction <= 1.0)) fail("epsilon_fraction must lie in (0, 1]");
  if (joint_action_limit == 0) fail("joint_action_limit must be positive");
}

}  // namespace tsc::marl
