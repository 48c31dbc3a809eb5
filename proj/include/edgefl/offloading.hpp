#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>
#include <vector>

#include "edgefl/rng.hpp"
#include "edgefl/wireless.hpp"

namespace edgefl::offloading {

struct TaskSpec {
  double input_bits = 1e6;
  double cycles = 1e9;
};

struct UeConfig {
  double arrival_prob = 0.5;
  std::size_t queue_capacity = 5;
  std::vector<double> energy_levels{0.0, 0.5, 1.0, 1.5, 2.0};
  double kappa = 1e-27;  // switched capacitance, E = kappa * f^3 * tau
  double epoch_seconds = 1.0;
  /// A task still unfinished after this many epochs in the system is aborted.
  std::size_t fail_deadline_epochs = 10;
  /// Scale for the cumulative-energy feature handed to the agent.
  double energy_norm_j = 1e5;
};

struct EdgeConfig {
  double edge_cpu_hz = 1e10;
};

struct UtilityWeights {
  double delay = 1.0;   // per second
  double energy = 0.5;  // per joule
  double drop = 5.0;    // per dropped task
  double fail = 5.0;    // per aborted task
};

struct OffloadConfig {
  std::size_t num_ues = 10;
  TaskSpec task;
  UeConfig ue;
  EdgeConfig edge;
  UtilityWeights weights;
  wireless::WirelessConfig wireless;
  wireless::ChannelModel channel = wireless::default_channel_model();

  std::size_t num_energy_levels() const { return ue.energy_levels.size(); }
  std::size_t action_count() const { return (wireless.num_channels + 1) * num_energy_levels(); }
  std::size_t observation_dim() const { return 7 + wireless.num_channels; }
  /// Throws ContractViolation when any invariant fails, including f_E above the fastest f_L.
  void validate() const;
};

struct Task {
  double remaining_bits;
  double remaining_cycles;
  std::uint32_t age_epochs = 0;
};

/// The UE's view of the system. The queue front is the task in service.
struct NetworkState {
  std::deque<Task> queue;
  double cum_energy_j = 0.0;
  double last_energy_j = 0.0;
  std::size_t occupied_channel = 0;  // 1-based, 0 = none
  std::vector<wireless::Level> channel_levels;

  std::size_t queue_len() const { return queue.size(); }
  double head_remaining_bits() const { return queue.empty() ? 0.0 : queue.front().remaining_bits; }
  double head_remaining_cycles() const { return queue.empty() ? 0.0 : queue.front().remaining_cycles; }
};

/// `channel` 0 runs locally, m >= 1 offloads over channel m; `energy` indexes energy_levels.
struct ControlAction {
  std::size_t channel = 0;
  std::size_t energy = 0;

  bool operator==(const ControlAction&) const = default;
};

std::size_t flatten(const ControlAction& action, std::size_t num_energy_levels);
ControlAction unflatten(std::size_t index, std::size_t num_energy_levels);

/// What happened during one epoch; the utility is computed from this.
struct EpochOutcome {
  double delay_s = 0.0;
  double energy_j = 0.0;
  std::uint32_t drops = 0;
  std::uint32_t failures = 0;
  std::uint32_t arrivals = 0;
  std::uint32_t completions = 0;
  double completed_cycles = 0.0;  // sum of nu over tasks completed this epoch
  double aborted_cycles = 0.0;    // work already spent on tasks aborted this epoch
  double local_cycles = 0.0;
  double edge_cycles = 0.0;
  double bits_sent = 0.0;
};

bool generate_arrival(double arrival_prob, Rng& rng);

/// DVFS inverse: f_L = (energy / (kappa * tau))^(1/3).
double local_cpu_freq(double energy_j, double kappa, double tau_s);

/// nu / f_L; +inf when f_L == 0.
double local_exec_time(double cycles, double f_local_hz);

/// Uplink transfer then edge execution: mu / rate + nu / f_E; +inf when bits remain and rate == 0.
double offload_exec_time(double input_bits, double rate_bps, double cycles, double f_edge_hz);

double utility(const EpochOutcome& outcome, const UtilityWeights& weights);

/// Uplink rate of `channel` (1-based) at the power implied by energy level `energy`.
double uplink_rate(const NetworkState& state, const ControlAction& action, const OffloadConfig& config);

/// Deterministic part of an epoch (serve the FIFO queue under `action`, age tasks, abort
/// overdue ones, charge energy). No arrivals, channels untouched.
EpochOutcome serve_epoch(NetworkState& state, const ControlAction& action, const OffloadConfig& config);

struct StepResult {
  double reward = 0.0;
  EpochOutcome outcome;
};

/// Full epoch: arrival, service, energy, channel evolution, utility. Consumes exactly
/// 1 + num_channels draws from `rng` whatever the action, so exogenous randomness lines
/// up across policies that share a stream.
StepResult offload_env_step(NetworkState& state, const ControlAction& action, const OffloadConfig& config,
                            Rng& rng);

enum class OffloadBaseline { Mobile, Edge, Greedy };

std::optional<OffloadBaseline> parse_offload_baseline(std::string_view name);
std::string_view to_string(OffloadBaseline kind);

ControlAction baseline_offload_action(OffloadBaseline kind, const NetworkState& state, const OffloadConfig& config);

/// Normalised agent input, length config.observation_dim().
std::vector<double> make_observation(const NetworkState& state, const OffloadConfig& config);

/// Empty queue, zero energy, channel levels drawn from the chain's stationary distribution.
NetworkState initial_state(const OffloadConfig& config, Rng& rng);

/// One UE with its own random stream.
class OffloadEnv {
 public:
  OffloadEnv(const OffloadConfig& config, Rng stream);

  std::size_t action_count() const { return config_->action_count(); }
  std::size_t observation_dim() const { return config_->observation_dim(); }
  std::vector<double> observation() const { return make_observation(state_, *config_); }
  std::vector<std::uint8_t> valid_mask() const { return std::vector<std::uint8_t>(action_count(), 1); }

  StepResult step(std::size_t action_index);
  ControlAction baseline_action(OffloadBaseline kind) const {
    return baseline_offload_action(kind, state_, *config_);
  }
  StepResult step(const ControlAction& action) { return offload_env_step(state_, action, *config_, stream_); }

  const NetworkState& state() const { return state_; }

 private:
  const OffloadConfig* config_;
  Rng stream_;
  NetworkState state_;
};

}  // namespace edgefl::offloading
