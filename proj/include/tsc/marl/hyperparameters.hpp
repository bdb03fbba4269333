#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace tsc::marl {

using Rng = std::mt19937_64;

/// Mixes a seed with stream labels (splitmix64 finalizer per word).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

struct Hyperparameters {
  std::size_t buffer_capacity = 100000;  // M
  std::size_t batch_size = 512;          // B
  double gamma = 0.95;
  double tau = 0.01;
  double actor_lr = 0.001;   // eps_a
  double critic_lr = 0.001;  // eps_c
  double weight_decay = 0.0; // w
  double reward_scale = 1.0; // r_c
  double noise_std = 0.01;   // sigma, on actor logits
  std::size_t learn_every = 1;  // l
  bool clip_gradients = true;   // g_c
  double clip_norm = 1.0;       // g_v
  std::size_t fc1 = 64;
  std::size_t fc2 = 64;
  std::size_t ensemble_size = 1;  // K
  std::size_t warmup_steps = 0;   // learning starts once a buffer holds max(B, warmup_steps)

  // centralized DQN baseline
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_fraction = 0.2;  // of all training steps
  std::size_t joint_action_limit = 4096;

  std::size_t learning_starts() const { return batch_size > warmup_steps ? batch_size : warmup_steps; }
  /// Throws ConfigError naming the first violated constraint.
  void validate() const;
};

}  // namespace tsc::marl
