#include "tsc/marl/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsc/errors.hpp"

namespace tsc::marl {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t state_width, std::size_t action_width,
                           std::size_t reward_width)
    : capacity_(capacity), state_width_(state_width), action_width_(action_width), reward_width_(reward_width) {
  if (capacity_ == 0) throw ConfigError("replay buffer capacity must be positive");
  // Storage grows with use; a large M costs nothing until it fills.
}

void ReplayBuffer::store(const Transition& t) {
  if (t.state.size() != state_width_ || t.next_state.size() != state_width_ || t.actions.size() != action_width_ ||
      t.rewards.size() != reward_width_)
    throw ShapeError("transition widths do not match the replay buffer");
  for (double r : t.rewards)
    if (!std::isfinite(r)) throw DivergenceError("non-finite reward stored");
  const auto put = [](std::vector<double>& dst, std::size_t slot, const std::vector<double>& src) {
    const std::size_t w = src.size();
    if (dst.size() < (slot + 1) * w) dst.resize((slot + 1) * w);
    std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(slot * w));
  };
  put(state_, cursor_, t.state);
  put(actions_, cursor_, t.actions);
  put(rewards_, cursor_, t.rewards);
  put(next_state_, cursor_, t.next_state);
  if (step_.size() <= cursor_) step_.resize(cursor_ + 1);
  step_[cursor_] = t.step_index;
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Minibatch ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (size_ == 0) throw SimulationError("cannot sample from an empty replay buffer");
  Minibatch mb{net::Matrix(batch, state_width_), net::Matrix(batch, action_width_), net::Matrix(batch, reward_width_),
               net::Matrix(batch, state_width_), {}};
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  const auto copy_row = [](const std::vector<double>& src, std::size_t slot, net::Matrix& dst, std::size_t r) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(slot * dst.cols), dst.cols, dst.row(r).begin());
  };
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t i = pick(rng);
    const std::size_t s = slot(i);
    mb.indices.push_back(i);
    copy_row(state_, s, mb.state, b);
    copy_row(actions_, s, mb.actions, b);
    copy_row(rewards_, s, mb.rewards, b);
    copy_row(next_state_, s, mb.next_state, b);
  }
  return mb;
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw SimulationError("replay index " + std::to_string(i) + " out of range");
  const std::size_t s = slot(i);
  const auto row = [s](const std::vector<double>& v, std::size_t w) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(s * w),
                               v.begin() + static_cast<std::ptrdiff_t>((s + 1) * w));
  };
  return {row(state_, state_width_), row(actions_, action_width_), row(rewards_, reward_width_),
          row(next_state_, state_width_), step_[s]};
}

bool operator==(const ReplayBuffer& a, const ReplayBuffer& b) {
  if (a.capacity_ != b.capacity_ || a.state_width_ != b.state_width_ || a.action_width_ != b.action_width_ ||
      a.reward_width_ != b.reward_width_ || a.size_ != b.size_)
    return false;
  for (std::size_t i = 0; i < a.size_; ++i) {
    const Transition x = a.at(i), y = b.at(i);
    if (x.state != y.state || x.actions != y.actions || x.rewards != y.rewards || x.next_state != y.next_state ||
        x.step_index != y.step_index)
      return false;
  }
  return true;
}

void ReplayBuffer::write(net::ByteWriter& w) const {
  w.u64(capacity_);
  w.u64(state_width_);
  w.u64(action_width_);
  w.u64(reward_width_);
  w.u64(size_);
  // oldest first, so a reloaded buffer is compact and starts at slot 0
  for (std::size_t i = 0; i < size_; ++i) {
    const Transition t = at(i);
    w.f64s(t.state);
    w.f64s(t.actions);
    w.f64s(t.rewards);
    w.f64s(t.next_state);
    w.u64(static_cast<std::uint64_t>(t.step_index));
  }
}

ReplayBuffer ReplayBuffer::read(net::ByteReader& r) {
  const auto capacity = r.u64();
  const auto sw = r.u64(), aw = r.u64(), rw = r.u64();
  const auto size = r.u64();
  if (capacity == 0 || size > capacity) throw DecodeError("replay buffer header is inconsistent");
  ReplayBuffer buf(capacity, sw, aw, rw);
  for (std::uint64_t i = 0; i < size; ++i) {
    Transition t;
    t.state = r.f64s(sw);
    t.actions = r.f64s(aw);
    t.rewards = r.f64s(rw);
    t.next_state = r.f64s(sw);
    t.step_index = static_cast<std::int64_t>(r.u64());
    buf.store(t);
  }
  return buf;
}

}  // namespace tsc::marl
