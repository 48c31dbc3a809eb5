#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "edgefl/federated.hpp"
#include "edgefl/offloading.hpp"

namespace edgefl::offloading {

// Brute-force epoch utility written from the model definition, without serve_epoch.
inline double oracle_epoch_utility(const NetworkState& s, std::size_t channel, std::size_t e, const OffloadConfig& c) {
  const double tau = c.ue.epoch_seconds;
  const double joules = c.ue.energy_levels[e];
  const double fl = std::cbrt(joules / (c.ue.kappa * tau));
  const double fe = c.edge.edge_cpu_hz;
  double rate = 0.0;
  if (channel > 0) {
    const double g = c.channel.gains[s.channel_levels[channel - 1]];
    rate = c.wireless.per_channel_bandwidth_hz() * std::log2(1.0 + (joules / tau) * g / c.wireless.noise_power_w);
  }
  double t = 0.0, delay = 0.0;
  std::size_t i = 0;
  std::vector<Task> q(s.queue.begin(), s.queue.end());
  for (; i < q.size(); ++i) {
    double bits = q[i].remaining_bits, cyc = q[i].remaining_cycles;
    double need;
    if (channel == 0) {
      if (fl == 0.0) break;
      need = cyc / fl;
      if (need > tau - t) {
        q[i].remaining_cycles -= fl * (tau - t);
        break;
      }
    } else {
      double tx = 0.0;
      if (bits > 0.0) {
        if (rate == 0.0) break;
        tx = bits / rate;
      }
      if (tx > tau - t) break;
      need = tx + cyc / fe;
      if (tx + cyc / fe > tau - t) {
        q[i].remaining_cycles -= fe * (tau - t - tx);
        break;
      }
    }
    t += need;
    delay += t;
  }
  const std::size_t remaining = q.size() - i;
  delay += tau * double(remaining);
  std::size_t fails = 0;
  for (std::size_t k = i; k < q.size(); ++k)
    if (q[k].age_epochs + 1 >= c.ue.fail_deadline_epochs) ++fails;
  return -(c.weights.delay * delay + c.weights.energy * joules + c.weights.fail * double(fails));
}

inline std::size_t oracle_greedy(const NetworkState& s, const OffloadConfig& c) {
  std::size_t best = 0;
  double best_u = -std::numeric_limits<double>::infinity();
  for (std::size_t ch = 0; ch <= c.wireless.num_channels; ++ch) {
    for (std::size_t e = 0; e < c.num_energy_levels(); ++e) {
      const double u = oracle_epoch_utility(s, ch, e, c);
      if (u > best_u) {
        best_u = u;
        best = ch * c.num_energy_levels() + e;
      }
    }
  }
  return best;
}

inline NetworkState random_state(const OffloadConfig& c, Rng& rng) {
  NetworkState s;
  s.channel_levels.resize(c.wireless.num_channels);
  for (auto& l : s.channel_levels) l = rng.uniform_index(c.channel.num_levels());
  const std::size_t n = rng.uniform_index(c.ue.queue_capacity + 1);
  std::size_t age = rng.uniform_index(c.ue.fail_deadline_epochs);
  for (std::size_t k = 0; k < n; ++k) {
    Task t{c.task.input_bits, c.task.cycles, static_cast<std::uint32_t>(age)};
    if (k == 0) {
      const double u = rng.uniform();
      t.remaining_bits = u < 0.3 ? 0.0 : u < 0.6 ? c.task.input_bits * rng.uniform() : c.task.input_bits;
      t.remaining_cycles = rng.uniform() < 0.5 ? c.task.cycles * (0.01 + 0.99 * rng.uniform()) : c.task.cycles;
    }
    s.queue.push_back(t);
    age = age == 0 ? 0 : age - rng.uniform_index(std::min<std::size_t>(age, 3) + 1);
  }
  s.cum_energy_j = 10 * rng.uniform();
  return s;
}

}  // namespace edgefl::offloading

namespace edgefl::fed {

// Weighted mean in long double, weights normalised as n_k / sum(n).
inline std::vector<double> mean_oracle(const std::vector<ClientUpdate>& updates) {
  long double total = 0;
  for (const auto& u : updates) total += u.sample_count;
  std::vector<long double> acc(updates.front().params.size(), 0);
  for (const auto& u : updates) {
    const long double w = total == 0 ? 1.0L / updates.size() : u.sample_count / total;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * u.params[i];
  }
  return {acc.begin(), acc.end()};
}

}  // namespace edgefl::fed
