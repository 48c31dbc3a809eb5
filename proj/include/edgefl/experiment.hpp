#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edgefl/config.hpp"
#include "edgefl/federated.hpp"
#include "edgefl/metrics.hpp"
#include "edgefl/mlp.hpp"

namespace edgefl {

struct RunSummary {
  std::string metric_name;             // "hit_rate" or "avg_utility"
  std::vector<double> per_client;      // evaluation metric per client
  double mean = 0.0;                   // mean over clients
  std::uint64_t uplink_bits = 0;       // this mode's ledger totals
  std::uint64_t downlink_bits = 0;
  std::vector<std::uint64_t> train_env_steps;  // per client
  std::vector<std::uint64_t> eval_env_steps;
};

struct MetricsReport {
  std::string run_id;
  Scenario scenario = Scenario::Caching;
  std::string mode;
  std::vector<MetricsRecord> records;
  std::vector<fed::RoundReport> rounds;
  RunSummary summary;
  fed::CommsLedger ledger;
  /// Final model for learning modes (merged server model or the centralized agent).
  std::optional<nn::MlpParams> model;
  /// Digest of every evaluated policy's parameters before and after evaluation.
  std::uint64_t eval_checksum_before = 0;
  std::uint64_t eval_checksum_after = 0;
  double wall_seconds = 0.0;  // not written to metrics files
};

/// Build the scenario, train according to the mode, then evaluate the frozen policy
/// (epsilon 0, no learning). Deterministic in (spec, seed).
MetricsReport run_experiment(const ExperimentSpec& spec);

/// Paths written by write_outputs.
struct OutputFiles {
  std::filesystem::path metrics;
  std::optional<std::filesystem::path> checkpoint;
};

/// Metrics file `<run_id>.csv|.jsonl` plus `<run_id>.ckpt` when a model exists and
/// checkpoints are enabled. The directory is created if missing.
OutputFiles write_outputs(const MetricsReport& report, const ExperimentSpec& spec,
                          const std::filesystem::path& output_dir);

}  // namespace edgefl
