#include "edgefl/caching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edgefl/errors.hpp"

namespace edgefl::caching {

std::vector<double> zipf_pmf(std::size_t num_contents, double alpha) {
  require(num_contents >= 1, "zipf_pmf: need at least one content");
  require(alpha >= 0.0, "zipf_pmf: alpha must be >= 0");
  std::vector<double> p(num_contents);
  double norm = 0.0;
  for (std::size_t k = 0; k < num_contents; ++k) {
    p[k] = std::pow(static_cast<double>(k + 1), -alpha);
    norm += p[k];
  }
  for (double& v : p) v /= norm;
  return p;
}

ContentCatalog::ContentCatalog(std::vector<double> popularity, double zipf_alpha)
    : popularity_(std::move(popularity)), zipf_alpha_(zipf_alpha) {
  require(!popularity_.empty(), "ContentCatalog: empty popularity vector");
  double total = 0.0;
  for (std::size_t k = 0; k < popularity_.size(); ++k) {
    require(popularity_[k] >= 0.0, "ContentCatalog: negative popularity");
    if (k > 0) require(popularity_[k] <= popularity_[k - 1], "ContentCatalog: popularity must be nonincreasing");
    total += popularity_[k];
  }
  require(std::abs(total - 1.0) <= 1e-12, "ContentCatalog: popularity must sum to 1");
  cumulative_.resize(popularity_.size());
  std::partial_sum(popularity_.begin(), popularity_.end(), cumulative_.begin());
  cumulative_.back() = 1.0;
}

ContentCatalog ContentCatalog::zipf(std::size_t num_contents, double alpha) {
  return ContentCatalog(zipf_pmf(num_contents, alpha), alpha);
}

ContentId ContentCatalog::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<ContentId>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                        static_cast<std::ptrdiff_t>(size()) - 1));
}

ContentId sample_request(const ContentCatalog& catalog, Rng& rng) { return catalog.sample(rng); }

double optimal_static_hitrate(const ContentCatalog& catalog, std::size_t capacity) {
  require(capacity <= catalog.size(), "optimal_static_hitrate: capacity exceeds catalog size");
  std::vector<double> p = catalog.popularity();
  std::sort(p.begin(), p.end(), std::greater<>());
  return std::accumulate(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(capacity), 0.0);
}

CacheState::CacheState(std::size_t num_contents, std::size_t capacity_, std::size_t freq_window_)
    : capacity(capacity_),
      lifetime_counts(num_contents, 0),
      freq_window(freq_window_),
      window_counts(num_contents, 0) {
  require(capacity >= 1, "CacheState: capacity must be >= 1");
  require(freq_window >= 1, "CacheState: frequency window must be >= 1");
  slots.reserve(capacity);
  window.reserve(freq_window);
}

std::optional<std::size_t> CacheState::find(ContentId id) const {
  const auto it = std::find(slots.begin(), slots.end(), id);
  if (it == slots.end()) return std::nullopt;
  return static_cast<std::size_t>(it - slots.begin());
}

double CacheState::window_frequency(ContentId id) const {
  return static_cast<double>(window_counts[id]) / static_cast<double>(freq_window);
}

void CacheState::record_request(ContentId id) {
  require(id < lifetime_counts.size(), "CacheState: content id out of range");
  if (window.size() < freq_window) {
    window.push_back(id);
  } else {
    --window_counts[window[window_head]];
    window[window_head] = id;
    window_head = (window_head + 1) % freq_window;
  }
  ++window_counts[id];
  ++lifetime_counts[id];
  ++request_count;
}

void CacheState::admit(ContentId id, std::size_t slot) {
  if (!full()) {
    slots.push_back(id);
    inserted_at.push_back(request_count);
    last_used.push_back(request_count);
    return;
  }
  slots[slot] = id;
  inserted_at[slot] = request_count;
  last_used[slot] = request_count;
}

std::vector<double> make_observation(const CacheState& state, ContentId request) {
  std::vector<double> obs(state.capacity + 1, 0.0);
  for (std::size_t i = 0; i < state.slots.size(); ++i) obs[i] = state.window_frequency(state.slots[i]);
  obs[state.capacity] = state.window_frequency(request);
  return obs;
}

std::vector<double> agent_features(std::span<const double> observation, std::size_t window) {
  const double w = static_cast<double>(window);
  const double denom = std::log1p(w);
  std::vector<double> out(observation.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log1p(observation[i] * w) / denom;
  return out;
}

CacheStepResult cache_env_step(CacheState& state, ContentId request, std::size_t action) {
  require(action <= state.capacity, "cache_env_step: action index exceeds capacity");
  state.record_request(request);
  CacheStepResult result;
  if (const auto slot = state.find(request)) {
    result.hit = true;
    result.reward = 1.0;
    ++state.hit_count;
    state.last_used[*slot] = state.request_count;
  } else {
    ++state.miss_count;
    if (action > 0) state.admit(request, action - 1);
  }
  result.observation = make_observation(state, request);
  return result;
}

std::optional<CachePolicy> parse_cache_policy(std::string_view name) {
  if (name == "lru") return CachePolicy::Lru;
  if (name == "lfu") return CachePolicy::Lfu;
  if (name == "fifo") return CachePolicy::Fifo;
  return std::nullopt;
}

std::string_view to_string(CachePolicy policy) {
  switch (policy) {
    case CachePolicy::Lru: return "lru";
    case CachePolicy::Lfu: return "lfu";
    case CachePolicy::Fifo: return "fifo";
  }
  return "?";
}

namespace {

std::size_t choose_victim(CachePolicy policy, const CacheState& state) {
  std::size_t victim = 0;
  for (std::size_t i = 1; i < state.slots.size(); ++i) {
    bool better = false;
    switch (policy) {
      case CachePolicy::Lru:
        better = state.last_used[i] < state.last_used[victim];
        break;
      case CachePolicy::Fifo:
        better = state.inserted_at[i] < state.inserted_at[victim];
        break;
      case CachePolicy::Lfu: {
        const auto ci = state.lifetime_counts[state.slots[i]];
        const auto cv = state.lifetime_counts[state.slots[victim]];
        better = ci < cv || (ci == cv && state.inserted_at[i] < state.inserted_at[victim]);
        break;
      }
    }
    if (better) victim = i;
  }
  return victim;
}

}  // namespace

bool baseline_cache_step(CachePolicy policy, CacheState& state, ContentId request, bool lfu_always_admit) {
  state.record_request(request);
  if (const auto slot = state.find(request)) {
    ++state.hit_count;
    state.last_used[*slot] = state.request_count;
    return true;
  }
  ++state.miss_count;
  if (!state.full()) {
    state.admit(request, 0);
    return false;
  }
  const std::size_t victim = choose_victim(policy, state);
  const bool admit = policy != CachePolicy::Lfu || lfu_always_admit ||
                     state.lifetime_counts[request] >= state.lifetime_counts[state.slots[victim]];
  if (admit) state.admit(request, victim);
  return false;
}

void CacheConfig::validate() const {
  require(num_nodes >= 1, "CacheConfig: num_nodes must be >= 1");
  require(num_contents >= 2, "CacheConfig: num_contents must be >= 2");
  require(zipf_alpha >= 0.0, "CacheConfig: zipf_alpha must be >= 0");
  require(capacity >= 1 && capacity <= num_contents, "CacheConfig: capacity must be in [1, num_contents]");
  require(freq_window >= 1, "CacheConfig: freq_window must be >= 1");
}

CacheEnv::CacheEnv(const ContentCatalog& catalog, const CacheConfig& config, Rng requests)
    : catalog_(&catalog),
      config_(config),
      requests_(requests),
      state_(catalog.size(), config.capacity, config.freq_window),
      rank_to_content_(catalog.size()) {
  std::iota(rank_to_content_.begin(), rank_to_content_.end(), ContentId{0});
  pending_ = rank_to_content_[catalog_->sample(requests_)];
}

std::vector<std::uint8_t> CacheEnv::valid_mask() const {
  std::vector<std::uint8_t> mask(action_count(), 1);
  if (pending_is_hit()) std::fill(mask.begin() + 1, mask.end(), 0);
  return mask;
}

void CacheEnv::advance() {
  if (config_.reshuffle_period > 0 && state_.request_count % config_.reshuffle_period == 0) {
    for (std::size_t i = rank_to_content_.size() - 1; i > 0; --i) {
      std::swap(rank_to_content_[i], rank_to_content_[requests_.uniform_index(i + 1)]);
    }
  }
  pending_ = rank_to_content_[catalog_->sample(requests_)];
}

CacheStepResult CacheEnv::step(std::size_t action) {
  CacheStepResult result = cache_env_step(state_, pending_, action);
  advance();
  return result;
}

bool CacheEnv::baseline_step(CachePolicy policy) {
  const bool hit = baseline_cache_step(policy, state_, pending_, config_.lfu_always_admit);
  advance();
  return hit;
}

}  // namespace edgefl::caching
