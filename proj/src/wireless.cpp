#include "edgefl/wireless.hpp"

#include <algorithm>
#include <cmath>

#include "edgefl/errors.hpp"

namespace edgefl::wireless {

void ChannelModel::validate() const {
  const std::size_t n = num_levels();
  require(n >= 2, "ChannelModel: need at least two levels");
  require(transition.size() == n * n, "ChannelModel: transition matrix must be num_levels^2");
  for (std::size_t i = 0; i < n; ++i) {
    require(gains[i] > 0.0, "ChannelModel: gains must be positive");
    if (i > 0) require(gains[i] > gains[i - 1], "ChannelModel: gains must be strictly increasing");
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = prob(i, j);
      require(p >= 0.0 && p <= 1.0, "ChannelModel: transition entries must lie in [0,1]");
      row += p;
    }
    require(std::abs(row - 1.0) <= 1e-12, "ChannelModel: transition rows must sum to 1");
  }
}

std::vector<double> birth_death_matrix(std::size_t num_levels, double stay_prob) {
  require(num_levels >= 2, "birth_death_matrix: need at least two levels");
  require(stay_prob >= 0.0 && stay_prob <= 1.0, "birth_death_matrix: stay_prob outside [0,1]");
  const double move = 0.5 * (1.0 - stay_prob);
  std::vector<double> p(num_levels * num_levels, 0.0);
  for (std::size_t i = 0; i < num_levels; ++i) {
    double stay = stay_prob;
    if (i > 0) p[i * num_levels + i - 1] = move; else stay += move;
    if (i + 1 < num_levels) p[i * num_levels + i + 1] = move; else stay += move;
    p[i * num_levels + i] = stay;
  }
  return p;
}

ChannelModel default_channel_model() {
  ChannelModel model;
  for (int i = 0; i < 6; ++i) model.gains.push_back(std::ldexp(1e-6, i));
  model.transition = birth_death_matrix(6, 0.6);
  return model;
}

void WirelessConfig::validate() const {
  require(total_bandwidth_hz > 0.0, "WirelessConfig: total_bandwidth_hz must be > 0");
  require(num_channels > 0, "WirelessConfig: num_channels must be > 0");
  require(noise_power_w > 0.0, "WirelessConfig: noise_power_w must be > 0");
}

Level channel_step(Level level, const ChannelModel& model, Rng& rng) {
  const std::size_t n = model.num_levels();
  require(level < n, "channel_step: level out of range");
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cumulative += model.prob(level, j);
    if (u < cumulative) return j;
  }
  // Rounding left a sliver above the last cumulative sum; take the last reachable level.
  for (std::size_t j = n; j-- > 0;) {
    if (model.prob(level, j) > 0.0) return j;
  }
  return level;
}

double shannon_rate(double bandwidth_hz, double tx_power_w, double gain_linear, double noise_power_w) {
  require(bandwidth_hz > 0.0, "shannon_rate: bandwidth must be > 0");
  require(noise_power_w > 0.0, "shannon_rate: noise power must be > 0");
  require(tx_power_w >= 0.0, "shannon_rate: negative transmit power");
  require(gain_linear >= 0.0, "shannon_rate: negative gain");
  return bandwidth_hz * std::log2(1.0 + tx_power_w * gain_linear / noise_power_w);
}

std::vector<double> stationary_distribution(const ChannelModel& model, double tolerance,
                                            std::size_t max_iterations) {
  const std::size_t n = model.num_levels();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) next[j] += pi[i] * model.prob(i, j);
    }
    double total = 0.0;
    for (double v : next) total += v;
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] /= total;
      change = std::max(change, std::abs(next[j] - pi[j]));
    }
    pi.swap(next);
    if (change <= tolerance) return pi;
  }
  throw NumericError("stationary_distribution: power iteration did not converge");
}

}  // namespace edgefl::wireless
