// Command-line front end: run, compare and validate experiment configs.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edgefl/config.hpp"
#include "edgefl/errors.hpp"
#include "edgefl/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
};

edgefl::ExperimentSpec resolve(const std::string& path, const Overrides& o) {
  edgefl::ExperimentSpec spec = edgefl::load_config(path);
  if (o.seed) spec.seed = *o.seed;
  if (const char* env = std::getenv("EDGEFL_OUT_DIR"); env && *env) spec.output_dir = env;
  if (o.out_dir) spec.output_dir = *o.out_dir;
  if (o.format) {
    if (*o.format == "csv") spec.format = edgefl::MetricsFormat::Csv;
    else if (*o.format == "jsonl") spec.format = edgefl::MetricsFormat::Jsonl;
    else throw edgefl::ConfigError("format", "must be csv or jsonl, got '" + *o.format + "'");
  }
  return spec;
}

void print_summary_header() {
  std::printf("%-36s %-12s %12s %16s %16s %9s\n", "run_id", "metric", "mean", "uplink_bits", "downlink_bits",
              "seconds");
}

void print_summary(const edgefl::MetricsReport& r) {
  std::printf("%-36s %-12s %12.6f %16llu %16llu %9.2f\n", r.run_id.c_str(), r.summary.metric_name.c_str(),
              r.summary.mean, static_cast<unsigned long long>(r.summary.uplink_bits),
              static_cast<unsigned long long>(r.summary.downlink_bits), r.wall_seconds);
}

edgefl::MetricsReport run_one(const edgefl::ExperimentSpec& spec) {
  auto report = edgefl::run_experiment(spec);
  auto files = edgefl::write_outputs(report, spec, spec.output_dir);
  std::fprintf(stderr, "wrote %s\n", files.metrics.string().c_str());
  if (files.checkpoint) std::fprintf(stderr, "wrote %s\n", files.checkpoint->string().c_str());
  return report;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated DDQN edge caching and offloading simulator"};
  app.require_subcommand(1);

  Overrides overrides;
  std::uint64_t seed = 0;
  std::string out_dir, format;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Master seed (overrides config)");
    sub->add_option("--out-dir", out_dir, "Output directory (overrides EDGEFL_OUT_DIR and config)");
    sub->add_option("--format", format, "Metrics format: csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  };

  std::string run_path;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", run_path, "Config file")->required();
  add_common(run);

  std::vector<std::string> compare_paths;
  auto* compare = app.add_subcommand("compare", "Run several configs on one seed and print a joined summary");
  compare->add_option("configs", compare_paths, "Config files")->required()->expected(1, -1);
  add_common(compare);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a config and print it fully resolved");
  validate->add_option("config", validate_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  for (auto* sub : {run, compare}) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) overrides.seed = seed;
    if (sub->count("--out-dir")) overrides.out_dir = out_dir;
    if (sub->count("--format")) overrides.format = format;
  }

  try {
    if (validate->parsed()) {
      std::cout << edgefl::to_json(edgefl::load_config(validate_path)) << '\n';
      return 0;
    }
    if (run->parsed()) {
      const auto report = run_one(resolve(run_path, overrides));
      print_summary_header();
      print_summary(report);
      return 0;
    }
    std::vector<edgefl::ExperimentSpec> specs;
    for (const auto& p : compare_paths) specs.push_back(resolve(p, overrides));
    // All runs share the first config's seed unless --seed was given.
    if (!overrides.seed) {
      for (auto& s : specs) s.seed = specs.front().seed;
    }
    std::vector<edgefl::MetricsReport> reports;
    for (const auto& s : specs) reports.push_back(run_one(s));
    print_summary_header();
    for (const auto& r : reports) print_summary(r);
    return 0;
  } catch (const edgefl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
