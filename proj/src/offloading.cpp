#include "edgefl/offloading.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edgefl/errors.hpp"

namespace edgefl::offloading {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void OffloadConfig::validate() const {
  require(num_ues >= 1, "OffloadConfig: num_ues must be >= 1");
  require(task.input_bits > 0.0 && task.cycles > 0.0, "OffloadConfig: task size must be positive");
  require(ue.arrival_prob >= 0.0 && ue.arrival_prob <= 1.0, "OffloadConfig: arrival_prob outside [0,1]");
  require(ue.queue_capacity >= 1, "OffloadConfig: queue_capacity must be >= 1");
  require(!ue.energy_levels.empty() && ue.energy_levels.front() == 0.0,
          "OffloadConfig: energy levels must start at 0");
  for (std::size_t i = 1; i < ue.energy_levels.size(); ++i) {
    require(ue.energy_levels[i] > ue.energy_levels[i - 1], "OffloadConfig: energy levels must be strictly increasing");
  }
  require(ue.kappa > 0.0 && ue.epoch_seconds > 0.0, "OffloadConfig: kappa and epoch_seconds must be > 0");
  require(ue.fail_deadline_epochs >= 1, "OffloadConfig: fail_deadline_epochs must be >= 1");
  require(ue.energy_norm_j > 0.0, "OffloadConfig: energy_norm_j must be > 0");
  require(weights.delay >= 0.0 && weights.energy >= 0.0 && weights.drop >= 0.0 && weights.fail >= 0.0,
          "OffloadConfig: utility weights must be >= 0");
  wireless.validate();
  channel.validate();
  const double max_local = local_cpu_freq(ue.energy_levels.back(), ue.kappa, ue.epoch_seconds);
  require(edge.edge_cpu_hz > max_local, "OffloadConfig: edge_cpu_hz must exceed the fastest local frequency");
}

std::size_t flatten(const ControlAction& action, std::size_t num_energy_levels) {
  return action.channel * num_energy_levels + action.energy;
}

ControlAction unflatten(std::size_t index, std::size_t num_energy_levels) {
  return ControlAction{index / num_energy_levels, index % num_energy_levels};
}

bool generate_arrival(double arrival_prob, Rng& rng) { return rng.bernoulli(arrival_prob); }

double local_cpu_freq(double energy_j, double kappa, double tau_s) {
  require(energy_j >= 0.0, "local_cpu_freq: negative energy");
  require(kappa > 0.0 && tau_s > 0.0, "local_cpu_freq: kappa and tau must be positive");
  return std::cbrt(energy_j / (kappa * tau_s));
}

double local_exec_time(double cycles, double f_local_hz) {
  if (cycles <= 0.0) return 0.0;
  if (f_local_hz <= 0.0) return kInf;
  return cycles / f_local_hz;
}

double offload_exec_time(double input_bits, double rate_bps, double cycles, double f_edge_hz) {
  require(f_edge_hz > 0.0, "offload_exec_time: edge frequency must be positive");
  double transfer = 0.0;
  if (input_bits > 0.0) {
    if (rate_bps <= 0.0) return kInf;
    transfer = input_bits / rate_bps;
  }
  return transfer + cycles / f_edge_hz;
}

double utility(const EpochOutcome& outcome, const UtilityWeights& weights) {
  return -(weights.delay * outcome.delay_s + weights.energy * outcome.energy_j +
           weights.drop * static_cast<double>(outcome.drops) + weights.fail * static_cast<double>(outcome.failures));
}

double uplink_rate(const NetworkState& state, const ControlAction& action, const OffloadConfig& config) {
  if (action.channel == 0) return 0.0;
  const double power = config.ue.energy_levels[action.energy] / config.ue.epoch_seconds;
  const double gain = config.channel.gains[state.channel_levels[action.channel - 1]];
  return wireless::shannon_rate(config.wireless.per_channel_bandwidth_hz(), power, gain, config.wireless.noise_power_w);
}

namespace {

void check_action(const ControlAction& action, const OffloadConfig& config) {
  require(action.channel <= config.wireless.num_channels, "offload: channel index out of range");
  require(action.energy < config.num_energy_levels(), "offload: energy index out of range");
}

}  // namespace

EpochOutcome serve_epoch(NetworkState& state, const ControlAction& action, const OffloadConfig& config) {
  check_action(action, config);
  const double tau = config.ue.epoch_seconds;
  const double energy = config.ue.energy_levels[action.energy];
  const double f_local = local_cpu_freq(energy, config.ue.kappa, tau);
  const double f_edge = config.edge.edge_cpu_hz;
  const double rate = uplink_rate(state, action, config);

  EpochOutcome out;
  double clock = 0.0;
  bool transmitted = false;
  while (!state.queue.empty() && clock < tau) {
    Task& head = state.queue.front();
    const double budget = tau - clock;
    if (action.channel == 0) {
      const double need = local_exec_time(head.remaining_cycles, f_local);
      if (need == kInf) break;
      if (need <= budget) {
        out.local_cycles += head.remaining_cycles;
        head.remaining_cycles = 0.0;
        clock += need;
      } else {
        const double done = f_local * budget;
        out.local_cycles += done;
        head.remaining_cycles -= done;
        clock = tau;
      }
    } else {
      if (head.remaining_bits > 0.0) {
        if (rate <= 0.0) break;
        const double need = head.remaining_bits / rate;
        transmitted = true;
        if (need <= budget) {
          out.bits_sent += head.remaining_bits;
          head.remaining_bits = 0.0;
          clock += need;
        } else {
          const double sent = rate * budget;
          out.bits_sent += sent;
          head.remaining_bits -= sent;
          clock = tau;
          break;
        }
      }
      const double need = head.remaining_cycles / f_edge;
      const double left = tau - clock;
      if (need <= left) {
        out.edge_cycles += head.remaining_cycles;
        head.remaining_cycles = 0.0;
        clock += need;
      } else {
        const double done = f_edge * left;
        out.edge_cycles += done;
        head.remaining_cycles -= done;
        clock = tau;
      }
    }
    if (head.remaining_cycles <= 0.0) {
      out.delay_s += clock;
      out.completed_cycles += config.task.cycles;
      ++out.completions;
      state.queue.pop_front();
    }
  }

  // Everything still queued spent the whole epoch in the system.
  out.delay_s += tau * static_cast<double>(state.queue.size());
  for (auto it = state.queue.begin(); it != state.queue.end();) {
    if (++it->age_epochs >= config.ue.fail_deadline_epochs) {
      out.aborted_cycles += config.task.cycles - it->remaining_cycles;
      ++out.failures;
      it = state.queue.erase(it);
    } else {
      ++it;
    }
  }

  state.occupied_channel = transmitted ? action.channel : 0;
  out.energy_j = energy;
  state.cum_energy_j += energy;
  state.last_energy_j = energy;
  return out;
}

StepResult offload_env_step(NetworkState& state, const ControlAction& action, const OffloadConfig& config,
                            Rng& rng) {
  check_action(action, config);
  const bool arrival = generate_arrival(config.ue.arrival_prob, rng);
  bool dropped = false;
  if (arrival) {
    if (state.queue.size() >= config.ue.queue_capacity) {
      dropped = true;
    } else {
      state.queue.push_back(Task{config.task.input_bits, config.task.cycles, 0});
    }
  }

  StepResult result;
  result.outcome = serve_epoch(state, action, config);
  result.outcome.arrivals = arrival ? 1 : 0;
  result.outcome.drops = dropped ? 1 : 0;

  for (auto& level : state.channel_levels) level = wireless::channel_step(level, config.channel, rng);

  result.reward = utility(result.outcome, config.weights);
  return result;
}

std::optional<OffloadBaseline> parse_offload_baseline(std::string_view name) {
  if (name == "mobile") return OffloadBaseline::Mobile;
  if (name == "edge") return OffloadBaseline::Edge;
  if (name == "greedy") return OffloadBaseline::Greedy;
  return std::nullopt;
}

std::string_view to_string(OffloadBaseline kind) {
  switch (kind) {
    case OffloadBaseline::Mobile: return "mobile";
    case OffloadBaseline::Edge: return "edge";
    case OffloadBaseline::Greedy: return "greedy";
  }
  return "?";
}

ControlAction baseline_offload_action(OffloadBaseline kind, const NetworkState& state, const OffloadConfig& config) {
  const std::size_t top_energy = config.num_energy_levels() - 1;
  switch (kind) {
    case OffloadBaseline::Mobile:
      return ControlAction{0, top_energy};
    case OffloadBaseline::Edge: {
      const auto best = std::max_element(state.channel_levels.begin(), state.channel_levels.end());
      return ControlAction{static_cast<std::size_t>(best - state.channel_levels.begin()) + 1, top_energy};
    }
    case OffloadBaseline::Greedy: {
      std::size_t best_index = 0;
      double best_utility = -kInf;
      for (std::size_t index = 0; index < config.action_count(); ++index) {
        const ControlAction candidate = unflatten(index, config.num_energy_levels());
        NetworkState scratch = state;
        const double u = utility(serve_epoch(scratch, candidate, config), config.weights);
        if (u > best_utility) {
          best_utility = u;
          best_index = index;
        }
      }
      return unflatten(best_index, config.num_energy_levels());
    }
  }
  return ControlAction{};
}

std::vector<double> make_observation(const NetworkState& state, const OffloadConfig& config) {
  std::vector<double> obs;
  obs.reserve(config.observation_dim());
  const double top_energy = config.ue.energy_levels.back();
  obs.push_back(static_cast<double>(state.queue_len()) / static_cast<double>(config.ue.queue_capacity));
  obs.push_back(state.head_remaining_bits() / config.task.input_bits);
  obs.push_back(state.head_remaining_cycles() / config.task.cycles);
  obs.push_back(state.queue.empty() ? 0.0
                                    : static_cast<double>(state.queue.front().age_epochs) /
                                          static_cast<double>(config.ue.fail_deadline_epochs));
  obs.push_back(std::min(1.0, state.cum_energy_j / config.ue.energy_norm_j));
  obs.push_back(top_energy > 0.0 ? state.last_energy_j / top_energy : 0.0);
  obs.push_back(static_cast<double>(state.occupied_channel) / static_cast<double>(config.wireless.num_channels));
  const double top_level = static_cast<double>(config.channel.num_levels() - 1);
  for (auto level : state.channel_levels) obs.push_back(static_cast<double>(level) / top_level);
  return obs;
}

NetworkState initial_state(const OffloadConfig& config, Rng& rng) {
  const auto pi = wireless::stationary_distribution(config.channel);
  NetworkState state;
  state.channel_levels.resize(config.wireless.num_channels);
  for (auto& level : state.channel_levels) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    level = pi.size() - 1;
    for (std::size_t j = 0; j < pi.size(); ++j) {
      cumulative += pi[j];
      if (u < cumulative) {
        level = j;
        break;
      }
    }
  }
  return state;
}

OffloadEnv::OffloadEnv(const OffloadConfig& config, Rng stream)
    : config_(&config), stream_(stream), state_(initial_state(config, stream_)) {}

StepResult OffloadEnv::step(std::size_t action_index) {
  require(action_index < action_count(), "OffloadEnv: action index out of range");
  return step(unflatten(action_index, config_->num_energy_levels()));
}

}  // namespace edgefl::offloading
