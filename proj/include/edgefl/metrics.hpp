#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edgefl/config.hpp"

namespace edgefl {

inline constexpr const char* kAllClients = "all";

struct MetricsRecord {
  std::string run_id;
  std::string scenario;
  std::string mode;
  std::string client_id;  // numeric id, or "all" for run-level values
  std::uint64_t step = 0;
  std::string metric_name;
  double value = 0.0;
};

/// CSV with header run_id,scenario,mode,client_id,step,metric_name,value.
std::string format_csv(const std::vector<MetricsRecord>& records);
/// One JSON object per line with the same fields as the CSV columns.
std::string format_jsonl(const std::vector<MetricsRecord>& records);

/// Write records to `path` in the given format. Throws std::runtime_error on I/O failure.
void emit_metrics(const std::vector<MetricsRecord>& records, MetricsFormat format, const std::filesystem::path& path);

}  // namespace edgefl
