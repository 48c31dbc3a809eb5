#pragma once

#include <cstddef>
#include <vector>

#include "edgefl/rng.hpp"

namespace edgefl::wireless {

using Level = std::size_t;

/// Finite-state Markov model of a quantized channel gain.
/// `transition` is row-major num_levels x num_levels; row i is the distribution of the next
/// level given current level i.
struct ChannelModel {
  std::vector<double> gains;
  std::vector<double> transition;

  std::size_t num_levels() const { return gains.size(); }
  double prob(Level from, Level to) const { return transition[from * num_levels() + to]; }

  /// Throws ContractViolation unless the invariants (>= 2 levels, strictly increasing
  /// positive gains, row-stochastic transition) hold.
  void validate() const;
};

/// Birth-death chain: stay with `stay_prob`, move one level up/down with the remaining mass
/// split evenly; at the boundaries the blocked move is folded into the stay probability.
std::vector<double> birth_death_matrix(std::size_t num_levels, double stay_prob);

/// Six levels with 3 dB spacing starting at 1e-6, birth-death transitions (stay 0.6).
ChannelModel default_channel_model();

struct WirelessConfig {
  double total_bandwidth_hz = 5e6;
  std::size_t num_channels = 10;
  double noise_power_w = 1e-6;

  double per_channel_bandwidth_hz() const {
    return total_bandwidth_hz / static_cast<double>(num_channels);
  }
  void validate() const;
};

/// Draw the next level from row `level` of the transition matrix. Consumes one draw.
Level channel_step(Level level, const ChannelModel& model, Rng& rng);

/// Shannon-Hartley capacity in bits per second.
double shannon_rate(double bandwidth_hz, double tx_power_w, double gain_linear, double noise_power_w);

/// Stationary distribution by power iteration from the uniform vector, stopping when the
/// sup-norm change falls below `tolerance`. Throws NumericError after `max_iterations`.
std::vector<double> stationary_distribution(const ChannelModel& model, double tolerance = 1e-12,
                                            std::size_t max_iterations = 1'000'000);

}  // namespace edgefl::wireless
