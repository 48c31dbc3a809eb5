#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <span>
#include <vector>

#include "edgefl/rng.hpp"

namespace edgefl::caching {

/// Content ids are 0-based; id k has popularity rank k + 1 unless a reshuffle is active.
using ContentId = std::size_t;

/// Zipf law: P(k) = k^-alpha / sum_j j^-alpha for ranks k = 1..num_contents.
std::vector<double> zipf_pmf(std::size_t num_contents, double alpha);

class ContentCatalog {
 public:
  /// `popularity` must be a probability vector, nonincreasing by id.
  explicit ContentCatalog(std::vector<double> popularity, double zipf_alpha = 0.0);

  static ContentCatalog zipf(std::size_t num_contents, double alpha);

  std::size_t size() const { return popularity_.size(); }
  const std::vector<double>& popularity() const { return popularity_; }
  double zipf_alpha() const { return zipf_alpha_; }

  /// Inverse-CDF draw of a popularity rank (0-based). One draw from `rng`.
  ContentId sample(Rng& rng) const;

 private:
  std::vector<double> popularity_;
  std::vector<double> cumulative_;
  double zipf_alpha_;
};

ContentId sample_request(const ContentCatalog& catalog, Rng& rng);

/// Hit rate of the best fixed cache: the mass of the `capacity` most popular contents.
double optimal_static_hitrate(const ContentCatalog& catalog, std::size_t capacity);

/// Equal-size content cache with the bookkeeping every policy here needs.
struct CacheState {
  CacheState(std::size_t num_contents, std::size_t capacity, std::size_t freq_window);

  std::size_t capacity;
  std::vector<ContentId> slots;
  std::vector<std::uint64_t> inserted_at;  // per slot, request clock at admission
  std::vector<std::uint64_t> last_used;    // per slot, request clock at last hit/admission

  std::vector<std::uint64_t> lifetime_counts;  // per content
  std::size_t freq_window;
  std::vector<ContentId> window;  // ring of the last `freq_window` requests
  std::size_t window_head = 0;
  std::vector<std::uint32_t> window_counts;  // per content, over `window`

  std::uint64_t hit_count = 0;
  std::uint64_t miss_count = 0;
  std::uint64_t request_count = 0;

  std::optional<std::size_t> find(ContentId id) const;
  bool full() const { return slots.size() >= capacity; }
  double window_frequency(ContentId id) const;

  /// Updates the sliding window, lifetime counts and the request counter.
  void record_request(ContentId id);
  /// Admit `id` into slot `slot` (0-based), appending instead when the cache is not full.
  void admit(ContentId id, std::size_t slot);
};

/// Decision features: window frequency of each cached content (zero-padded to capacity)
/// followed by the window frequency of `request`. Length capacity + 1.
std::vector<double> make_observation(const CacheState& state, ContentId request);
/// Network input for an observation: each frequency f becomes log(1 + f W) / log(1 + W), so
/// rarely requested contents stay distinguishable instead of crowding near zero.
std::vector<double> agent_features(std::span<const double> observation, std::size_t window);

struct CacheStepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool hit = false;
};

/// Action 0 bypasses; action i >= 1 admits the request into slot i. Ignored on a hit.
CacheStepResult cache_env_step(CacheState& state, ContentId request, std::size_t action);

enum class CachePolicy { Lru, Lfu, Fifo };

std::optional<CachePolicy> parse_cache_policy(std::string_view name);
std::string_view to_string(CachePolicy policy);

/// Classic replacement, evicting by recency/frequency/age when full. LRU and FIFO always
/// admit on a miss. LFU admits a missed content into a full cache only if its lifetime count
/// is at least the victim's, so it settles on the most requested contents; with
/// `lfu_always_admit` it admits unconditionally like the others.
bool baseline_cache_step(CachePolicy policy, CacheState& state, ContentId request, bool lfu_always_admit = false);

struct CacheConfig {
  std::size_t num_nodes = 6;
  std::size_t num_contents = 50;
  double zipf_alpha = 1.58;
  std::size_t capacity = 5;
  std::size_t freq_window = 1000;
  /// Reassign popularity ranks to random contents every this many requests; 0 disables.
  std::size_t reshuffle_period = 0;
  bool lfu_always_admit = false;

  void validate() const;
};

/// One edge node: a cache plus its request stream. Holds the request that is awaiting a
/// decision; each step resolves it and draws the next.
class CacheEnv {
 public:
  CacheEnv(const ContentCatalog& catalog, const CacheConfig& config, Rng requests);

  std::size_t action_count() const { return state_.capacity + 1; }
  std::size_t observation_dim() const { return state_.capacity + 1; }

  ContentId pending_request() const { return pending_; }
  bool pending_is_hit() const { return state_.find(pending_).has_value(); }
  std::vector<double> observation() const { return make_observation(state_, pending_); }
  /// On a pending hit only bypass is valid.
  std::vector<std::uint8_t> valid_mask() const;

  CacheStepResult step(std::size_t action);
  bool baseline_step(CachePolicy policy);

  const CacheState& state() const { return state_; }

 private:
  void advance();

  const ContentCatalog* catalog_;
  CacheConfig config_;
  Rng requests_;
  CacheState state_;
  std::vector<ContentId> rank_to_content_;
  ContentId pending_ = 0;
};

}  // namespace edgefl::caching
