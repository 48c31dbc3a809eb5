#include "edgefl/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <memory>

#include "edgefl/agent.hpp"
#include "edgefl/caching.hpp"
#include "edgefl/checkpoint.hpp"
#include "edgefl/errors.hpp"
#include "edgefl/offloading.hpp"

namespace edgefl {

namespace {

class MetricSink {
 public:
  MetricSink(const ExperimentSpec& spec, std::vector<MetricsRecord>& out)
      : run_id_(spec.run_id()), scenario_(to_string(spec.scenario)), mode_(spec.mode.name()), out_(out) {}

  void add(const std::string& client, std::uint64_t step, const std::string& name, double value) {
    out_.push_back(MetricsRecord{run_id_, scenario_, mode_, client, step, name, value});
  }

 private:
  std::string run_id_;
  std::string scenario_;
  std::string mode_;
  std::vector<MetricsRecord>& out_;
};

/// Shared per-client bookkeeping: interval averages for the metric and the training loss.
class Driver : public fed::EnvDriver {
 public:
  Driver(std::size_t id, std::string metric, MetricSink& sink, std::size_t interval)
      : id_(id), metric_(std::move(metric)), sink_(&sink), interval_(interval) {}

  void record_loss(double loss) override {
    loss_sum_ += loss;
    ++loss_count_;
  }

  virtual void begin_eval() {
    flush();
    training_ = false;
    phase_sum_ = 0.0;
    phase_count_ = 0;
  }
  void end_phase() { flush(); }

  double phase_mean() const { return phase_count_ ? phase_sum_ / static_cast<double>(phase_count_) : 0.0; }
  std::uint64_t train_steps() const { return train_steps_; }
  std::uint64_t eval_steps() const { return eval_steps_; }

  virtual void step_baseline() = 0;

 protected:
  bool training() const { return training_; }

  void before_step() {
    if (interval_count_ >= interval_) flush();
  }

  void account(double value) {
    interval_sum_ += value;
    ++interval_count_;
    phase_sum_ += value;
    ++phase_count_;
    ++(training_ ? train_steps_ : eval_steps_);
  }

 private:
  void flush() {
    const std::string client = std::to_string(id_);
    const std::uint64_t step = train_steps_ + eval_steps_;
    const std::string prefix = training_ ? "train_" : "eval_";
    if (interval_count_ > 0) {
      sink_->add(client, step, prefix + metric_, interval_sum_ / static_cast<double>(interval_count_));
    }
    if (loss_count_ > 0) sink_->add(client, step, "train_loss", loss_sum_ / static_cast<double>(loss_count_));
    interval_sum_ = 0.0;
    interval_count_ = 0;
    loss_sum_ = 0.0;
    loss_count_ = 0;
  }

  std::size_t id_;
  std::string metric_;
  MetricSink* sink_;
  std::size_t interval_;
  bool training_ = true;
  double interval_sum_ = 0.0;
  std::size_t interval_count_ = 0;
  double loss_sum_ = 0.0;
  std::size_t loss_count_ = 0;
  double phase_sum_ = 0.0;
  std::size_t phase_count_ = 0;
  std::uint64_t train_steps_ = 0;
  std::uint64_t eval_steps_ = 0;
};

class CacheDriver final : public Driver {
 public:
  CacheDriver(std::size_t id, const caching::ContentCatalog& catalog, const caching::CacheConfig& config,
              std::optional<caching::CachePolicy> baseline, MetricSink& sink, std::size_t interval, Rng stream)
      : Driver(id, "hit_rate", sink, interval), env_(catalog, config, stream), baseline_(baseline), window_(config.freq_window) {}

  std::size_t observation_dim() const { return env_.observation_dim(); }
  std::size_t action_count() const { return env_.action_count(); }

  // Only misses are decisions: on a hit nothing can change and the agent is not asked.
  // A transition runs from one miss to the next, carrying the discounted hits in between,
  // so the return per request is the same as stepping every request.
  std::optional<rl::Transition> step(rl::DqnAgent& agent) override {
    before_step();
    std::size_t action = 0;
    if (!env_.pending_is_hit()) {
      const auto state = features();
      const auto mask = env_.valid_mask();
      action = training() ? agent.act(state, mask) : agent.greedy_action(state, mask);
      if (training()) {
        open_ = rl::Transition{};
        open_->state = state;
        open_->action = action;
        open_->span = 0;
        weight_ = 1.0;
      }
    }
    const auto result = env_.step(action);
    account(result.hit ? 1.0 : 0.0);
    if (!open_) return std::nullopt;
    open_->reward += weight_ * result.reward;
    weight_ *= agent.config().discount;
    ++open_->span;
    if (env_.pending_is_hit()) return std::nullopt;
    open_->next_state = features();
    open_->next_mask = env_.valid_mask();
    std::optional<rl::Transition> done = std::move(open_);
    open_.reset();
    return done;
  }

  void begin_eval() override {
    Driver::begin_eval();
    open_.reset();
  }

  void step_baseline() override {
    before_step();
    account(env_.baseline_step(*baseline_) ? 1.0 : 0.0);
  }

 private:
  std::vector<double> features() const { return caching::agent_features(env_.observation(), window_); }

  caching::CacheEnv env_;
  std::optional<caching::CachePolicy> baseline_;
  std::size_t window_;
  std::optional<rl::Transition> open_;
  double weight_ = 1.0;  // discount applied to the next reward of the open transition
};

class OffloadDriver final : public Driver {
 public:
  OffloadDriver(std::size_t id, const offloading::OffloadConfig& config,
                std::optional<offloading::OffloadBaseline> baseline, MetricSink& sink, std::size_t interval, Rng stream)
      : Driver(id, "avg_utility", sink, interval), env_(config, stream), baseline_(baseline) {}

  std::size_t observation_dim() const { return env_.observation_dim(); }
  std::size_t action_count() const { return env_.action_count(); }

  std::optional<rl::Transition> step(rl::DqnAgent& agent) override {
    before_step();
    rl::Transition t;
    t.state = env_.observation();
    const auto mask = env_.valid_mask();
    t.action = training() ? agent.act(t.state, mask) : agent.greedy_action(t.state, mask);
    const auto result = env_.step(t.action);
    t.reward = result.reward;
    t.next_state = env_.observation();
    t.next_mask = mask;
    account(result.reward);
    return t;
  }

  void step_baseline() override {
    before_step();
    account(env_.step(env_.baseline_action(*baseline_)).reward);
  }

 private:
  offloading::OffloadEnv env_;
  std::optional<offloading::OffloadBaseline> baseline_;
};

std::uint64_t combined_checksum(const std::vector<const rl::DqnAgent*>& agents) {
  std::uint64_t h = 0;
  for (const auto* a : agents) h = splitmix64(h ^ nn::checksum(a->main_net().values()));
  return h;
}

void sort_records(std::vector<MetricsRecord>& records) {
  auto rank = [](const std::string& client) {
    return client == kAllClients ? std::numeric_limits<std::uint64_t>::max() : std::stoull(client);
  };
  std::stable_sort(records.begin(), records.end(), [&](const MetricsRecord& a, const MetricsRecord& b) {
    if (a.step != b.step) return a.step < b.step;
    return rank(a.client_id) < rank(b.client_id);
  });
}

}  // namespace

MetricsReport run_experiment(const ExperimentSpec& spec) {
  const auto started = std::chrono::steady_clock::now();
  MetricsReport report;
  report.run_id = spec.run_id();
  report.scenario = spec.scenario;
  report.mode = spec.mode.name();
  MetricSink sink(spec, report.records);

  std::optional<caching::ContentCatalog> catalog;
  std::vector<std::unique_ptr<Driver>> drivers;
  std::size_t obs_dim = 0;
  std::size_t action_count = 0;

  if (spec.scenario == Scenario::Caching) {
    spec.caching.validate();
    catalog.emplace(caching::ContentCatalog::zipf(spec.caching.num_contents, spec.caching.zipf_alpha));
    std::optional<caching::CachePolicy> policy;
    if (!spec.mode.learns()) {
      policy = caching::parse_cache_policy(spec.mode.baseline);
      if (!policy) throw ConfigError("mode", "unknown caching baseline '" + spec.mode.baseline + "'");
    }
    for (std::size_t k = 0; k < spec.caching.num_nodes; ++k) {
      auto d = std::make_unique<CacheDriver>(k, *catalog, spec.caching, policy, sink, spec.metrics_interval,
                                             derive_stream(spec.seed, "cache-node-" + std::to_string(k)));
      obs_dim = d->observation_dim();
      action_count = d->action_count();
      drivers.push_back(std::move(d));
    }
  } else {
    spec.offloading.validate();
    std::optional<offloading::OffloadBaseline> policy;
    if (!spec.mode.learns()) {
      policy = offloading::parse_offload_baseline(spec.mode.baseline);
      if (!policy) throw ConfigError("mode", "unknown offloading baseline '" + spec.mode.baseline + "'");
    }
    for (std::size_t k = 0; k < spec.offloading.num_ues; ++k) {
      auto d = std::make_unique<OffloadDriver>(k, spec.offloading, policy, sink, spec.metrics_interval,
                                               derive_stream(spec.seed, "ue-" + std::to_string(k)));
      obs_dim = d->observation_dim();
      action_count = d->action_count();
      drivers.push_back(std::move(d));
    }
  }
  if (spec.mode.learns()) spec.agent.validate();
  spec.fed.validate();

  const std::uint64_t total_steps = spec.train_steps + spec.eval_steps;
  std::vector<std::unique_ptr<rl::DqnAgent>> agents;
  // Policy used by each driver during evaluation.
  std::vector<rl::DqnAgent*> eval_policy(drivers.size(), nullptr);

  switch (spec.mode.kind) {
    case Mode::Kind::Baseline: {
      for (auto& d : drivers) {
        for (std::size_t s = 0; s < spec.train_steps; ++s) d->step_baseline();
        d->begin_eval();
        for (std::size_t s = 0; s < spec.eval_steps; ++s) d->step_baseline();
        d->end_phase();
      }
      break;
    }
    case Mode::Kind::Federated: {
      const nn::MlpShape shape{obs_dim, spec.agent.hidden_dim, action_count};
      Rng server_init = derive_stream(spec.seed, "server-init");
      std::vector<double> server = nn::init_mlp(shape, server_init).flat();

      std::vector<fed::FedClient> clients;
      for (std::size_t k = 0; k < drivers.size(); ++k) {
        agents.push_back(std::make_unique<rl::DqnAgent>(obs_dim, action_count, spec.agent,
                                                        derive_stream(spec.seed, "agent-" + std::to_string(k))));
        clients.push_back(fed::FedClient{k, drivers[k].get(), agents.back().get(), 0});
        eval_policy[k] = agents.back().get();
      }
      Rng sampler = derive_stream(spec.seed, "fed-sampler");
      std::size_t done = 0;
      for (std::size_t round = 0; done < spec.train_steps; ++round) {
        const std::size_t steps = std::min(spec.fed.round_period, spec.train_steps - done);
        fed::RoundResult result = fed::fed_round(server, clients, spec.fed, steps, report.ledger, sampler, round);
        server = std::move(result.merged);
        done += steps;
        sink.add(kAllClients, done, "cum_uplink_bits", static_cast<double>(report.ledger.federated_uplink_bits));
        sink.add(kAllClients, done, "cum_downlink_bits", static_cast<double>(report.ledger.federated_downlink_bits));
        report.rounds.push_back(std::move(result.report));
      }
      fed::broadcast_model(server, clients, spec.fed, report.ledger);
      report.model = nn::MlpParams(shape, server);
      break;
    }
    case Mode::Kind::Centralized: {
      agents.push_back(std::make_unique<rl::DqnAgent>(obs_dim, action_count, spec.agent,
                                                      derive_stream(spec.seed, "central-agent")));
      std::vector<fed::EnvDriver*> envs;
      for (auto& d : drivers) envs.push_back(d.get());
      fed::centralized_train(envs, *agents.front(), spec.train_steps, spec.fed, report.ledger);
      std::fill(eval_policy.begin(), eval_policy.end(), agents.front().get());
      report.model = agents.front()->main_net();
      break;
    }
  }

  if (spec.mode.learns()) {
    std::vector<const rl::DqnAgent*> evaluated(eval_policy.begin(), eval_policy.end());
    report.eval_checksum_before = combined_checksum(evaluated);
    for (std::size_t k = 0; k < drivers.size(); ++k) {
      drivers[k]->begin_eval();
      for (std::size_t s = 0; s < spec.eval_steps; ++s) drivers[k]->step(*eval_policy[k]);
      drivers[k]->end_phase();
    }
    report.eval_checksum_after = combined_checksum(evaluated);
  }

  RunSummary& summary = report.summary;
  summary.metric_name = spec.scenario == Scenario::Caching ? "hit_rate" : "avg_utility";
  for (auto& d : drivers) {
    summary.per_client.push_back(d->phase_mean());
    summary.train_env_steps.push_back(d->train_steps());
    summary.eval_env_steps.push_back(d->eval_steps());
  }
  double sum = 0.0;
  for (double v : summary.per_client) sum += v;
  summary.mean = summary.per_client.empty() ? 0.0 : sum / static_cast<double>(summary.per_client.size());
  if (spec.mode.kind == Mode::Kind::Federated) {
    summary.uplink_bits = report.ledger.federated_uplink_bits;
    summary.downlink_bits = report.ledger.federated_downlink_bits;
  } else if (spec.mode.kind == Mode::Kind::Centralized) {
    summary.uplink_bits = report.ledger.centralized_uplink_bits;
    summary.downlink_bits = report.ledger.centralized_downlink_bits;
  }

  const std::string final_name = "final_" + summary.metric_name;
  for (std::size_t k = 0; k < summary.per_client.size(); ++k) {
    sink.add(std::to_string(k), total_steps, final_name, summary.per_client[k]);
  }
  sink.add(kAllClients, total_steps, final_name, summary.mean);
  sink.add(kAllClients, total_steps, "uplink_bits", static_cast<double>(summary.uplink_bits));
  sink.add(kAllClients, total_steps, "downlink_bits", static_cast<double>(summary.downlink_bits));
  sort_records(report.records);

  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

OutputFiles write_outputs(const MetricsReport& report, const ExperimentSpec& spec,
                          const std::filesystem::path& output_dir) {
  std::filesystem::create_directories(output_dir);
  OutputFiles files;
  files.metrics = output_dir / (report.run_id + (spec.format == MetricsFormat::Csv ? ".csv" : ".jsonl"));
  emit_metrics(report.records, spec.format, files.metrics);
  if (spec.write_checkpoint && report.model) {
    files.checkpoint = output_dir / (report.run_id + ".ckpt");
    checkpoint::save(*files.checkpoint, *report.model);
  }
  return files;
}

}  // namespace edgefl
