#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tsc/marl/hyperparameters.hpp"
#include "tsc/net/matrix.hpp"
#include "tsc/net/serialize.hpp"

namespace tsc::marl {

struct Transition {
  std::vector<double> state;       // x: all observations, agent order
  std::vector<double> actions;     // a_1 .. a_N, concatenated
  std::vector<double> rewards;     // scaled, one per agent
  std::vector<double> next_state;  // x'
  std::int64_t step_index = 0;
};

struct Minibatch {
  net::Matrix state;
  net::Matrix actions;
  net::Matrix rewards;
  net::Matrix next_state;
  std::vector<std::size_t> indices;  // positions, 0 = oldest
};

/// Fixed-capacity FIFO ring of transitions, sampled uniformly with replacement.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_width, std::size_t action_width, std::size_t reward_width);

  void store(const Transition& t);
  Minibatch sample(std::size_t batch, Rng& rng) const;
  /// i-th stored transition, oldest first.
  Transition at(std::size_t i) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t state_width() const { return state_width_; }
  std::size_t action_width() const { return action_width_; }
  std::size_t reward_width() const { return reward_width_; }

  void write(net::ByteWriter& w) const;
  static ReplayBuffer read(net::ByteReader& r);

  /// Same widths, capacity and contents in the same order.
  friend bool operator==(const ReplayBuffer& a, const ReplayBuffer& b);

 private:
  std::size_t slot(std::size_t i) const { return (cursor_ + capacity_ - size_ + i) % capacity_; }

  std::size_t capacity_;
  std::size_t state_width_, action_width_, reward_width_;
  std::size_t cursor_ = 0;  // next slot to write
  std::size_t size_ = 0;
  std::vector<double> state_, actions_, rewards_, next_state_;
  std::vector<std::int64_t> step_;
};

}  // namespace tsc::marl
