#include "edgefl/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace edgefl {

namespace {

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_csv(const std::vector<MetricsRecord>& records) {
  std::string out = "run_id,scenario,mode,client_id,step,metric_name,value\n";
  for (const auto& r : records) {
    out += r.run_id + ',' + r.scenario + ',' + r.mode + ',' + r.client_id + ',' + std::to_string(r.step) + ',' +
           r.metric_name + ',' + format_value(r.value) + '\n';
  }
  return out;
}

std::string format_jsonl(const std::vector<MetricsRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["run_id"] = r.run_id;
    j["scenario"] = r.scenario;
    j["mode"] = r.mode;
    j["client_id"] = r.client_id;
    j["step"] = r.step;
    j["metric_name"] = r.metric_name;
    j["value"] = r.value;
    out += j.dump() + '\n';
  }
  return out;
}

void emit_metrics(const std::vector<MetricsRecord>& records, MetricsFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open metrics file " + path.string());
  const std::string text = format == MetricsFormat::Csv ? format_csv(records) : format_jsonl(records);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace edgefl
