#include "edgefl/replay.hpp"

#include <algorithm>

#include "edgefl/errors.hpp"

namespace edgefl::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_count)
    : capacity_(capacity),
      state_dim_(state_dim),
      action_count_(action_count),
      states_(capacity * state_dim),
      next_states_(capacity * state_dim),
      actions_(capacity),
      rewards_(capacity),
      terminals_(capacity),
      next_masks_(capacity * action_count),
      spans_(capacity) {
  require(capacity > 0, "ReplayBuffer: capacity must be > 0");
}

void ReplayBuffer::push(std::span<const double> state, std::size_t action, double reward,
                        std::span<const double> next_state, bool terminal, std::span<const std::uint8_t> next_mask, std::uint32_t span) {
  require(state.size() == state_dim_ && next_state.size() == state_dim_, "ReplayBuffer: state dimension mismatch");
  require(next_mask.size() == action_count_, "ReplayBuffer: mask length mismatch");
  require(action < action_count_, "ReplayBuffer: action out of range");
  require(span >= 1, "ReplayBuffer: span must be >= 1");
  std::copy(state.begin(), state.end(), states_.begin() + static_cast<std::ptrdiff_t>(cursor_ * state_dim_));
  std::copy(next_state.begin(), next_state.end(),
            next_states_.begin() + static_cast<std::ptrdiff_t>(cursor_ * state_dim_));
  std::copy(next_mask.begin(), next_mask.end(),
            next_masks_.begin() + static_cast<std::ptrdiff_t>(cursor_ * action_count_));
  actions_[cursor_] = action;
  rewards_[cursor_] = reward;
  terminals_[cursor_] = terminal ? 1 : 0;
  spans_[cursor_] = span;
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Transition ReplayBuffer::at(std::size_t i) const {
  require(i < size_, "ReplayBuffer::at: index out of range");
  const std::size_t slot = size_ < capacity_ ? i : (cursor_ + i) % capacity_;
  Transition t;
  const auto s = state(slot);
  const auto ns = next_state(slot);
  const auto m = next_mask(slot);
  t.state.assign(s.begin(), s.end());
  t.next_state.assign(ns.begin(), ns.end());
  t.next_mask.assign(m.begin(), m.end());
  t.action = actions_[slot];
  t.reward = rewards_[slot];
  t.terminal = terminals_[slot] != 0;
  t.span = spans_[slot];
  return t;
}

}  // namespace edgefl::rl
