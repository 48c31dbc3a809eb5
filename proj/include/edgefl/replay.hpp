#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace edgefl::rl {

struct Transition {
  std::vector<double> state;
  std::size_t action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
  std::vector<std::uint8_t> next_mask;  // valid actions in next_state
  /// Environment steps between state and next_state; the bootstrap is discounted by gamma^span.
  std::uint32_t span = 1;
};

/// Fixed-capacity ring of transitions stored in flat arrays. Once full, each insertion
/// overwrites the oldest entry.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_count);

  void push(std::span<const double> state, std::size_t action, double reward, std::span<const double> next_state,
            bool terminal, std::span<const std::uint8_t> next_mask, std::uint32_t span = 1);
  void push(const Transition& t) {
    push(t.state, t.action, t.reward, t.next_state, t.terminal, t.next_mask, t.span);
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t action_count() const { return action_count_; }

  /// Slot `i` in insertion order, 0 = oldest retained transition.
  Transition at(std::size_t i) const;

  std::span<const double> state(std::size_t slot) const { return {&states_[slot * state_dim_], state_dim_}; }
  std::span<const double> next_state(std::size_t slot) const { return {&next_states_[slot * state_dim_], state_dim_}; }
  std::span<const std::uint8_t> next_mask(std::size_t slot) const {
    return {&next_masks_[slot * action_count_], action_count_};
  }
  std::size_t action(std::size_t slot) const { return actions_[slot]; }
  double reward(std::size_t slot) const { return rewards_[slot]; }
  bool terminal(std::size_t slot) const { return terminals_[slot] != 0; }
  std::uint32_t span(std::size_t slot) const { return spans_[slot]; }

 private:
  std::size_t capacity_;
  std::size_t state_dim_;
  std::size_t action_count_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
  std::vector<double> states_;
  std::vector<double> next_states_;
  std::vector<std::size_t> actions_;
  std::vector<double> rewards_;
  std::vector<std::uint8_t> terminals_;
  std::vector<std::uint8_t> next_masks_;
  std::vector<std::uint32_t> spans_;
};

}  // namespace edgefl::rl
