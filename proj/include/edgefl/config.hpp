#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "edgefl/agent.hpp"
#include "edgefl/caching.hpp"
#include "edgefl/federated.hpp"
#include "edgefl/offloading.hpp"

namespace edgefl {

enum class Scenario { Caching, Offloading };

std::string_view to_string(Scenario s);

struct Mode {
  enum class Kind { Federated, Centralized, Baseline };
  Kind kind = Kind::Federated;
  std::string baseline;  // lru|lfu|fifo or mobile|edge|greedy when kind == Baseline

  std::string name() const;
  bool learns() const { return kind != Kind::Baseline; }
};

enum class MetricsFormat { Csv, Jsonl };

struct ExperimentSpec {
  Scenario scenario = Scenario::Caching;
  Mode mode;
  std::uint64_t seed = 42;
  std::size_t train_steps = 200'000;  // per client; requests (caching) or epochs (offloading)
  std::size_t eval_steps = 50'000;
  std::size_t metrics_interval = 1000;
  std::string output_dir = "out";
  MetricsFormat format = MetricsFormat::Csv;
  bool write_checkpoint = true;

  caching::CacheConfig caching;
  offloading::OffloadConfig offloading;
  rl::AgentConfig agent;
  fed::FedConfig fed;

  std::size_t num_clients() const {
    return scenario == Scenario::Caching ? caching.num_nodes : offloading.num_ues;
  }
  /// e.g. "offloading-federated-s42"
  std::string run_id() const;
};

/// Parse and validate a JSON config (comments allowed). Omitted fields take defaults;
/// train/eval lengths default per scenario (caching 2e5/5e4 requests, offloading 5e4/1e4
/// epochs). Throws ConfigError naming the offending field.
ExperimentSpec parse_config(std::string_view text);
ExperimentSpec load_config(const std::filesystem::path& path);

/// Fully resolved spec as JSON text; parse_config(to_json(s)) reproduces s.
std::string to_json(const ExperimentSpec& spec);

}  // namespace edgefl
