#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "edgefl/caching.hpp"
#include "edgefl/errors.hpp"

using namespace edgefl;
using namespace edgefl::caching;

namespace {

constexpr ContentId a = 0, b = 1, c = 2;

// Top-5 mass of Zipf(50, 1.58) and the head of Zipf(10, 1.58), evaluated beforehand at
// 30 significant digits.
constexpr double kOptimalTop5 = 0.785936295834699421674732844791;
constexpr double kZipf10Head = 0.525980360883756923617304158658;

std::size_t replay_hits(CachePolicy policy, std::size_t capacity, const std::vector<ContentId>& requests) {
  CacheState s(10, capacity, 100);
  std::size_t hits = 0;
  for (auto r : requests) hits += baseline_cache_step(policy, s, r) ? 1 : 0;
  return hits;
}

CacheState with_slots(std::size_t capacity, std::vector<ContentId> slots) {
  CacheState s(10, capacity, 100);
  for (auto id : slots) {
    s.record_request(id);
    ++s.miss_count;
    s.admit(id, 0);
  }
  return s;
}

}  // namespace

TEST(Zipf, UniformWhenAlphaZero) {
  auto p = zipf_pmf(3, 0.0);
  for (double v : p) EXPECT_DOUBLE_EQ(v, 1.0 / 3);
}

TEST(Zipf, TwoContentsAlphaOne) {
  auto p = zipf_pmf(2, 1.0);
  EXPECT_NEAR(p[0], 2.0 / 3, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3, 1e-15);
}

TEST(Zipf, HeadMatchesOracle) { EXPECT_NEAR(zipf_pmf(10, 1.58)[0], kZipf10Head, 1e-14); }

TEST(Zipf, SumsToOneAndNonincreasing) {
  for (double alpha : {0.0, 0.5, 1.0, 1.58, 3.0}) {
    for (std::size_t n : {1u, 2u, 50u, 1000u}) {
      auto p = zipf_pmf(n, alpha);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        s += p[i];
        if (i) EXPECT_LE(p[i], p[i - 1]);
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(SampleRequest, DegenerateCatalogs) {
  Rng rng(4);
  ContentCatalog single({1.0});
  ContentCatalog point({1.0, 0.0});
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(sample_request(single, rng), 0u);
    EXPECT_EQ(sample_request(point, rng), 0u);
  }
}

TEST(SampleRequest, FrequenciesMatchZipf) {
  const auto catalog = ContentCatalog::zipf(50, 1.58);
  Rng rng(derive_stream(42, "zipf-test"));
  std::vector<double> freq(50, 0.0);
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) freq[sample_request(catalog, rng)] += 1.0 / n;
  double l1 = 0.0;
  for (std::size_t k = 0; k < 50; ++k) l1 += std::abs(freq[k] - catalog.popularity()[k]);
  EXPECT_LT(l1, 0.01);
}

TEST(ContentCatalog, RejectsInvalidPopularity) {
  EXPECT_THROW(ContentCatalog({0.5, 0.4}), ContractViolation);
  EXPECT_THROW(ContentCatalog({0.3, 0.7}), ContractViolation);
  EXPECT_THROW(ContentCatalog(std::vector<double>{}), ContractViolation);
}

TEST(CacheEnvStep, HitForcesNoOp) {
  for (std::size_t action : {0u, 1u, 2u}) {
    auto s = with_slots(2, {a, b});
    auto r = cache_env_step(s, a, action);
    EXPECT_TRUE(r.hit);
    EXPECT_EQ(r.reward, 1.0);
    EXPECT_EQ(s.slots, (std::vector<ContentId>{a, b}));
  }
}

TEST(CacheEnvStep, BypassLeavesCache) {
  auto s = with_slots(2, {a, b});
  auto r = cache_env_step(s, c, 0);
  EXPECT_FALSE(r.hit);
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_EQ(s.slots, (std::vector<ContentId>{a, b}));
}

TEST(CacheEnvStep, ReplaceSecondSlot) {
  auto s = with_slots(2, {a, b});
  auto r = cache_env_step(s, c, 2);
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_EQ(s.slots, (std::vector<ContentId>{a, c}));
}

TEST(CacheEnvStep, AdmitAppendsWhileNotFull) {
  CacheState s(10, 3, 100);
  cache_env_step(s, a, 3);
  cache_env_step(s, b, 1);
  EXPECT_EQ(s.slots, (std::vector<ContentId>{a, b}));
}

TEST(CacheEnvStep, ObservationIsWindowFrequencies) {
  CacheState s(10, 2, 4);
  cache_env_step(s, a, 1);
  cache_env_step(s, a, 0);
  auto r = cache_env_step(s, b, 0);
  // window holds [a, a, b]; cache holds a only.
  ASSERT_EQ(r.observation.size(), 3u);
  EXPECT_DOUBLE_EQ(r.observation[0], 0.5);
  EXPECT_DOUBLE_EQ(r.observation[1], 0.0);
  EXPECT_DOUBLE_EQ(r.observation[2], 0.25);
  cache_env_step(s, c, 0);
  cache_env_step(s, c, 0);  // a's first request leaves the window
  EXPECT_DOUBLE_EQ(s.window_frequency(a), 0.25);
  EXPECT_DOUBLE_EQ(s.window_frequency(c), 0.5);
}

TEST(AgentFeatures, LogScaledCounts) {
  // log(2)/log(1001) and log(51)/log(1001), evaluated beforehand at 30 digits.
  const std::vector<double> obs{0.0, 0.001, 0.05, 1.0};
  const auto f = agent_features(obs, 1000);
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[0], 0.0);
  EXPECT_NEAR(f[1], 0.100328815061612074857955090673, 1e-15);
  EXPECT_NEAR(f[2], 0.569107713085459811088819558133, 1e-15);
  EXPECT_NEAR(f[3], 1.0, 1e-15);
}

TEST(AgentFeatures, MonotoneInUnitRange) {
  double prev = -1.0;
  for (int count = 0; count <= 1000; ++count) {
    const double v = agent_features(std::vector<double>{count / 1000.0}, 1000)[0];
    ASSERT_GT(v, prev);
    ASSERT_LE(v, 1.0 + 1e-15);
    prev = v;
  }
}

TEST(CacheEnvStep, RejectsOutOfRangeAction) {
  auto s = with_slots(2, {a, b});
  EXPECT_THROW(cache_env_step(s, c, 3), ContractViolation);
}

TEST(CacheEnvStep, Deterministic) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto s1 = with_slots(3, {a, b});
    auto s2 = s1;
    const ContentId req = rng.uniform_index(10);
    const std::size_t act = rng.uniform_index(4);
    auto r1 = cache_env_step(s1, req, act);
    auto r2 = cache_env_step(s2, req, act);
    EXPECT_EQ(r1.observation, r2.observation);
    EXPECT_EQ(s1.slots, s2.slots);
  }
}

TEST(Baselines, LruSingleSlotAlternates) { EXPECT_EQ(replay_hits(CachePolicy::Lru, 1, {a, b, a}), 0u); }

TEST(Baselines, TwoSlotsHoldBoth) {
  for (auto p : {CachePolicy::Lru, CachePolicy::Lfu, CachePolicy::Fifo}) {
    EXPECT_EQ(replay_hits(p, 2, {a, b, a}), 1u);
  }
}

TEST(Baselines, LfuHandTrace) {
  CacheState s(10, 2, 100);
  std::vector<bool> hits;
  for (auto r : {a, a, b, c, a}) hits.push_back(baseline_cache_step(CachePolicy::Lfu, s, r));
  EXPECT_EQ(hits, (std::vector<bool>{false, true, false, false, true}));
  EXPECT_EQ(s.slots, (std::vector<ContentId>{a, c}));  // c evicted b
}

TEST(Baselines, LruEvictsLeastRecent) {
  CacheState s(10, 2, 100);
  for (auto r : {a, b, a, c}) baseline_cache_step(CachePolicy::Lru, s, r);
  EXPECT_EQ(s.slots, (std::vector<ContentId>{a, c}));
}

TEST(Baselines, FifoEvictsOldest) {
  CacheState s(10, 2, 100);
  for (auto r : {a, b, a, c}) baseline_cache_step(CachePolicy::Fifo, s, r);
  EXPECT_EQ(s.slots, (std::vector<ContentId>{c, b}));
}

TEST(Baselines, LfuTieBreaksByOldestInsertion) {
  CacheState s(10, 2, 100);
  for (auto r : {b, a, c}) baseline_cache_step(CachePolicy::Lfu, s, r);
  EXPECT_EQ(s.slots, (std::vector<ContentId>{c, a}));
}

TEST(Baselines, LfuAdmission) {
  // a is popular, b then c arrive once each: c does not displace a.
  CacheState s(10, 1, 100);
  for (auto r : {a, a, c}) baseline_cache_step(CachePolicy::Lfu, s, r);
  EXPECT_EQ(s.slots, (std::vector<ContentId>{a}));
  CacheState always(10, 1, 100);
  for (auto r : {a, a, c}) baseline_cache_step(CachePolicy::Lfu, always, r, true);
  EXPECT_EQ(always.slots, (std::vector<ContentId>{c}));
}

TEST(Baselines, ParseNames) {
  EXPECT_EQ(parse_cache_policy("lru"), CachePolicy::Lru);
  EXPECT_EQ(parse_cache_policy("lfu"), CachePolicy::Lfu);
  EXPECT_EQ(parse_cache_policy("fifo"), CachePolicy::Fifo);
  EXPECT_FALSE(parse_cache_policy("random").has_value());
  EXPECT_EQ(to_string(CachePolicy::Lfu), "lfu");
}

TEST(OptimalStatic, Examples) {
  EXPECT_NEAR(optimal_static_hitrate(ContentCatalog::zipf(10, 0.0), 5), 0.5, 1e-15);
  EXPECT_NEAR(optimal_static_hitrate(ContentCatalog::zipf(2, 1.0), 1), 2.0 / 3, 1e-15);
  EXPECT_NEAR(optimal_static_hitrate(ContentCatalog::zipf(50, 1.58), 5), kOptimalTop5, 1e-14);
}

class CacheProperties : public ::testing::TestWithParam<int> {};

TEST_P(CacheProperties, SlotsDistinctAndCountersBalance) {
  const auto catalog = ContentCatalog::zipf(30, 0.8);
  CacheConfig cfg;
  cfg.num_contents = 30;
  cfg.capacity = 4;
  cfg.freq_window = 50;
  Rng actions(GetParam() * 7 + 1);
  CacheEnv env(catalog, cfg, Rng(GetParam()));
  std::vector<CacheEnv> baseline_envs;
  for (int p = 0; p < 3; ++p) baseline_envs.emplace_back(catalog, cfg, Rng(GetParam()));
  for (int t = 0; t < 5000; ++t) {
    env.step(actions.uniform_index(cfg.capacity + 1));
    baseline_envs[0].baseline_step(CachePolicy::Lru);
    baseline_envs[1].baseline_step(CachePolicy::Lfu);
    baseline_envs[2].baseline_step(CachePolicy::Fifo);
    for (const CacheEnv* e : {&env, &baseline_envs[0], &baseline_envs[1], &baseline_envs[2]}) {
      const auto& s = e->state();
      ASSERT_LE(s.slots.size(), s.capacity);
      std::set<ContentId> uniq(s.slots.begin(), s.slots.end());
      ASSERT_EQ(uniq.size(), s.slots.size());
      ASSERT_EQ(s.hit_count + s.miss_count, s.request_count);
    }
  }
}

TEST_P(CacheProperties, HitRateBoundedByOptimal) {
  const auto catalog = ContentCatalog::zipf(50, 1.58);
  CacheConfig cfg;
  const double bound = optimal_static_hitrate(catalog, cfg.capacity) + 0.02;
  Rng actions(GetParam() + 100);
  CacheEnv random_env(catalog, cfg, derive_stream(GetParam(), "bound"));
  CacheEnv lru_env(catalog, cfg, derive_stream(GetParam(), "bound"));
  const int n = 200'000;
  for (int t = 0; t < n; ++t) {
    random_env.step(actions.uniform_index(cfg.capacity + 1));
    lru_env.baseline_step(CachePolicy::Lru);
  }
  EXPECT_LE(random_env.state().hit_count / double(n), bound);
  EXPECT_LE(lru_env.state().hit_count / double(n), bound);
}

INSTANTIATE_TEST_SUITE_P(Seeds, CacheProperties, ::testing::Values(1, 2, 3));

TEST(CacheEnv, MaskOnlyBypassOnHit) {
  const auto catalog = ContentCatalog::zipf(3, 2.0);
  CacheConfig cfg;
  cfg.num_contents = 3;
  cfg.capacity = 3;
  CacheEnv env(catalog, cfg, Rng(1));
  for (int t = 0; t < 100; ++t) {
    const auto mask = env.valid_mask();
    ASSERT_EQ(mask.size(), 4u);
    if (env.pending_is_hit()) {
      EXPECT_EQ(mask, (std::vector<std::uint8_t>{1, 0, 0, 0}));
    } else {
      EXPECT_EQ(mask, (std::vector<std::uint8_t>{1, 1, 1, 1}));
    }
    env.step(1);
  }
}

TEST(CacheEnv, LfuNearOptimalUnderStationaryZipf) {
  const auto catalog = ContentCatalog::zipf(50, 1.58);
  CacheConfig cfg;
  CacheEnv env(catalog, cfg, derive_stream(42, "cache-node-0"));
  const int n = 200'000;
  for (int t = 0; t < n; ++t) env.baseline_step(CachePolicy::Lfu);
  EXPECT_NEAR(env.state().hit_count / double(n), kOptimalTop5, 0.02);
}

TEST(CacheEnv, ReshuffleKeepsStreamLength) {
  // Reshuffling permutes which content holds each rank; request statistics by rank stay Zipf.
  const auto catalog = ContentCatalog::zipf(20, 1.0);
  CacheConfig cfg;
  cfg.num_contents = 20;
  cfg.reshuffle_period = 100;
  CacheEnv env(catalog, cfg, Rng(3));
  std::set<ContentId> seen_heads;
  for (int block = 0; block < 20; ++block) {
    std::vector<int> counts(20, 0);
    for (int t = 0; t < 100; ++t) {
      ++counts[env.pending_request()];
      env.baseline_step(CachePolicy::Lru);
    }
    seen_heads.insert(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }
  EXPECT_GT(seen_heads.size(), 3u);
  EXPECT_EQ(env.state().request_count, 2000u);
}
