#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "edgefl/mlp.hpp"
#include "edgefl/replay.hpp"
#include "edgefl/rng.hpp"

namespace edgefl::rl {

struct AgentConfig {
  std::size_t hidden_dim = 200;
  double discount = 0.9;
  double epsilon = 0.001;
  /// Linear anneal from epsilon_start down to epsilon over this many actions; 0 keeps
  /// epsilon constant.
  std::size_t epsilon_anneal_steps = 0;
  double epsilon_start = 1.0;
  std::size_t batch_size = 200;
  std::size_t replay_capacity = 5000;
  std::size_t target_sync_period = 250;
  /// Stored transitions per gradient step.
  std::size_t train_interval = 4;
  /// Global-norm gradient clip; 0 disables.
  double grad_clip = 0.0;
  nn::AdamConfig adam;

  void validate() const;
};

/// Epsilon-greedy over the valid actions. With probability epsilon picks uniformly among
/// valid actions, otherwise the first maximal valid q. No draw is taken when epsilon == 0.
std::size_t select_action(std::span<const double> q, double epsilon, std::span<const std::uint8_t> valid_mask,
                          Rng& rng);

/// Index of the largest q among valid actions, ties to the smallest index.
std::size_t masked_argmax(std::span<const double> q, std::span<const std::uint8_t> valid_mask);

/// Double-DQN bootstrap: the main network picks the next action, the target network scores it.
double ddqn_target(double reward, bool terminal, double gamma, std::span<const double> q_main_next,
                   std::span<const double> q_target_next, std::span<const std::uint8_t> next_valid_mask);

struct TrainStats {
  double loss = 0.0;
  bool target_synced = false;
};

class DqnAgent {
 public:
  DqnAgent(std::size_t observation_dim, std::size_t action_count, const AgentConfig& config, Rng rng);

  std::size_t observation_dim() const { return main_.shape().input_dim; }
  std::size_t action_count() const { return main_.shape().output_dim; }
  const AgentConfig& config() const { return config_; }

  /// Exploring action under the current epsilon; advances the anneal schedule.
  std::size_t act(std::span<const double> observation, std::span<const std::uint8_t> valid_mask);
  /// Pure greedy action (evaluation); touches no state.
  std::size_t greedy_action(std::span<const double> observation, std::span<const std::uint8_t> valid_mask) const;
  double current_epsilon() const;

  /// Store a transition and run a gradient step when train_interval transitions have
  /// accumulated. Returns the loss of that step, if one ran.
  std::optional<double> observe(const Transition& transition);

  /// One Double-DQN update on a uniform mini-batch drawn with replacement. Returns nullopt
  /// (and changes nothing) while the buffer holds fewer than batch_size transitions.
  std::optional<TrainStats> train_step();

  const nn::MlpParams& main_net() const { return main_; }
  const nn::MlpParams& target_net() const { return target_; }
  const nn::AdamState& optimizer() const { return adam_; }
  const ReplayBuffer& replay() const { return replay_; }
  ReplayBuffer& replay() { return replay_; }
  std::uint64_t train_steps() const { return train_steps_; }

  /// Install merged parameters: main and target both become `values`, sync counter resets.
  /// Replay memory and optimizer moments stay local.
  void load_parameters(std::span<const double> values);

 private:
  AgentConfig config_;
  Rng rng_;
  nn::MlpParams main_;
  nn::MlpParams target_;
  nn::AdamState adam_;
  ReplayBuffer replay_;
  std::uint64_t train_steps_ = 0;
  std::uint64_t steps_since_sync_ = 0;
  std::uint64_t actions_taken_ = 0;
  std::uint64_t pending_transitions_ = 0;

  // Reused between train steps to avoid reallocating batch-sized buffers.
  struct Workspace {
    nn::Matrix states, next_states, output_grad, scratch;
    nn::BatchForward current, main_next, target_next;
    std::vector<std::size_t> slots;
  };
  Workspace work_;
  nn::MlpParams grads_;
};

}  // namespace edgefl::rl
