#include "edgefl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "edgefl/errors.hpp"

namespace edgefl {

using nlohmann::json;

std::string_view to_string(Scenario s) { return s == Scenario::Caching ? "caching" : "offloading"; }

std::string Mode::name() const {
  switch (kind) {
    case Kind::Federated: return "federated";
    case Kind::Centralized: return "centralized";
    case Kind::Baseline: return "baseline:" + baseline;
  }
  return "?";
}

std::string ExperimentSpec::run_id() const {
  std::string mode_label = mode.name();
  for (char& c : mode_label) {
    if (c == ':') c = '-';
  }
  return std::string(to_string(scenario)) + "-" + mode_label + "-s" + std::to_string(seed);
}

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

/// Reads one JSON object, remembering which keys were consumed so leftovers can be rejected.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const char* key) const { return node_.contains(key); }
  std::string field(const char* key) const { return join(path_, key); }

  const json* take(const char* key) {
    consumed_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void read(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError(field(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(field(key), "must be finite");
    }
  }

  void read(const char* key, std::size_t& out) {
    if (const json* v = take(key)) {
      if (v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
        out = v->get<std::size_t>();
      } else if (v->is_number_float() && v->get<double>() >= 0.0 &&
                 std::floor(v->get<double>()) == v->get<double>() && v->get<double>() < 1.8e19) {
        out = static_cast<std::size_t>(v->get<double>());
      } else {
        throw ConfigError(field(key), "expected a non-negative integer");
      }
    }
  }

  void read(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void read(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void read(const char* key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) throw ConfigError(field(key), "expected an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(field(key), "expected an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  std::optional<Section> child(const char* key) {
    if (const json* v = take(key)) return Section(*v, field(key));
    return std::nullopt;
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!consumed_.contains(key)) throw ConfigError(join(path_, key), "unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> consumed_;
};

void check(bool ok, const std::string& field, const std::string& reason) {
  if (!ok) throw ConfigError(field, reason);
}

std::string fmt_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void read_wireless(Section& s, offloading::OffloadConfig& oc) {
  auto& w = oc.wireless;
  s.read("total_bandwidth_hz", w.total_bandwidth_hz);
  s.read("num_channels", w.num_channels);
  s.read("noise_power_w", w.noise_power_w);
  s.read("gains", oc.channel.gains);
  double stay = 0.6;
  const bool has_stay = s.has("stay_prob");
  s.read("stay_prob", stay);
  std::vector<double> transition;
  const bool has_transition = s.has("transition");
  s.read("transition", transition);
  s.finish();

  check(w.total_bandwidth_hz > 0.0, s.field("total_bandwidth_hz"), "must be > 0");
  check(w.num_channels >= 1, s.field("num_channels"), "must be >= 1");
  check(w.noise_power_w > 0.0, s.field("noise_power_w"), "must be > 0");
  check(oc.channel.gains.size() >= 2, s.field("gains"), "need at least two levels");
  check(!(has_stay && has_transition), s.field("transition"), "give either stay_prob or transition, not both");
  if (has_transition) {
    check(transition.size() == oc.channel.gains.size() * oc.channel.gains.size(), s.field("transition"),
          "must have num_levels^2 entries");
    oc.channel.transition = transition;
  } else {
    check(stay >= 0.0 && stay <= 1.0, s.field("stay_prob"), "must be in [0, 1], got " + fmt_value(stay));
    oc.channel.transition = wireless::birth_death_matrix(oc.channel.gains.size(), stay);
  }
  try {
    oc.channel.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(s.field("gains"), e.what());
  }
}

void read_caching(Section& s, caching::CacheConfig& c) {
  s.read("num_nodes", c.num_nodes);
  s.read("num_contents", c.num_contents);
  s.read("zipf_alpha", c.zipf_alpha);
  s.read("capacity", c.capacity);
  s.read("freq_window", c.freq_window);
  s.read("reshuffle_period", c.reshuffle_period);
  s.read("lfu_always_admit", c.lfu_always_admit);
  s.finish();
  check(c.num_nodes >= 1, s.field("num_nodes"), "must be >= 1");
  check(c.num_contents >= 2, s.field("num_contents"), "must be >= 2");
  check(c.zipf_alpha >= 0.0, s.field("zipf_alpha"), "must be >= 0");
  check(c.capacity >= 1 && c.capacity <= c.num_contents, s.field("capacity"), "must be in [1, num_contents]");
  check(c.freq_window >= 1, s.field("freq_window"), "must be >= 1");
}

void read_offloading(Section& s, offloading::OffloadConfig& oc) {
  s.read("num_ues", oc.num_ues);
  s.read("input_bits", oc.task.input_bits);
  s.read("cycles", oc.task.cycles);
  s.read("arrival_prob", oc.ue.arrival_prob);
  s.read("queue_capacity", oc.ue.queue_capacity);
  s.read("energy_levels", oc.ue.energy_levels);
  s.read("kappa", oc.ue.kappa);
  s.read("epoch_seconds", oc.ue.epoch_seconds);
  s.read("fail_deadline_epochs", oc.ue.fail_deadline_epochs);
  s.read("energy_norm_j", oc.ue.energy_norm_j);
  s.read("edge_cpu_hz", oc.edge.edge_cpu_hz);
  if (auto w = s.child("weights")) {
    w->read("delay", oc.weights.delay);
    w->read("energy", oc.weights.energy);
    w->read("drop", oc.weights.drop);
    w->read("fail", oc.weights.fail);
    w->finish();
    check(oc.weights.delay >= 0.0, w->field("delay"), "must be >= 0");
    check(oc.weights.energy >= 0.0, w->field("energy"), "must be >= 0");
    check(oc.weights.drop >= 0.0, w->field("drop"), "must be >= 0");
    check(oc.weights.fail >= 0.0, w->field("fail"), "must be >= 0");
  }
  s.finish();
  check(oc.num_ues >= 1, s.field("num_ues"), "must be >= 1");
  check(oc.task.input_bits > 0.0, s.field("input_bits"), "must be > 0");
  check(oc.task.cycles > 0.0, s.field("cycles"), "must be > 0");
  check(oc.ue.arrival_prob >= 0.0 && oc.ue.arrival_prob <= 1.0, s.field("arrival_prob"),
        "must be in [0, 1], got " + fmt_value(oc.ue.arrival_prob));
  check(oc.ue.queue_capacity >= 1, s.field("queue_capacity"), "must be >= 1");
  check(!oc.ue.energy_levels.empty() && oc.ue.energy_levels.front() == 0.0, s.field("energy_levels"),
        "must start with 0");
  for (std::size_t i = 1; i < oc.ue.energy_levels.size(); ++i) {
    check(oc.ue.energy_levels[i] > oc.ue.energy_levels[i - 1], s.field("energy_levels"), "must be strictly increasing");
  }
  check(oc.ue.kappa > 0.0, s.field("kappa"), "must be > 0");
  check(oc.ue.epoch_seconds > 0.0, s.field("epoch_seconds"), "must be > 0");
  check(oc.ue.fail_deadline_epochs >= 1, s.field("fail_deadline_epochs"), "must be >= 1");
  check(oc.ue.energy_norm_j > 0.0, s.field("energy_norm_j"), "must be > 0");
  const double max_local = offloading::local_cpu_freq(oc.ue.energy_levels.back(), oc.ue.kappa, oc.ue.epoch_seconds);
  check(oc.edge.edge_cpu_hz > max_local, s.field("edge_cpu_hz"),
        "must exceed the fastest local CPU frequency " + fmt_value(max_local));
}

void read_agent(Section& s, rl::AgentConfig& a) {
  s.read("hidden_dim", a.hidden_dim);
  s.read("discount", a.discount);
  s.read("epsilon", a.epsilon);
  s.read("epsilon_anneal_steps", a.epsilon_anneal_steps);
  s.read("epsilon_start", a.epsilon_start);
  s.read("batch_size", a.batch_size);
  s.read("replay_capacity", a.replay_capacity);
  s.read("target_sync_period", a.target_sync_period);
  s.read("train_interval", a.train_interval);
  s.read("grad_clip", a.grad_clip);
  s.read("learning_rate", a.adam.learning_rate);
  s.read("adam_beta1", a.adam.beta1);
  s.read("adam_beta2", a.adam.beta2);
  s.read("adam_epsilon", a.adam.epsilon);
  s.finish();
  check(a.hidden_dim >= 1, s.field("hidden_dim"), "must be >= 1");
  check(a.discount >= 0.0 && a.discount < 1.0, s.field("discount"), "must be in [0, 1), got " + fmt_value(a.discount));
  check(a.epsilon >= 0.0 && a.epsilon <= 1.0, s.field("epsilon"), "must be in [0, 1], got " + fmt_value(a.epsilon));
  check(a.epsilon_start >= 0.0 && a.epsilon_start <= 1.0, s.field("epsilon_start"), "must be in [0, 1]");
  check(a.replay_capacity >= 1, s.field("replay_capacity"), "must be >= 1");
  check(a.batch_size >= 1 && a.batch_size <= a.replay_capacity, s.field("batch_size"),
        "must be in [1, replay_capacity]");
  check(a.target_sync_period >= 1, s.field("target_sync_period"), "must be >= 1");
  check(a.train_interval >= 1, s.field("train_interval"), "must be >= 1");
  check(a.grad_clip >= 0.0, s.field("grad_clip"), "must be >= 0");
  check(a.adam.learning_rate > 0.0, s.field("learning_rate"), "must be > 0");
  check(a.adam.beta1 >= 0.0 && a.adam.beta1 < 1.0, s.field("adam_beta1"), "must be in [0, 1)");
  check(a.adam.beta2 >= 0.0 && a.adam.beta2 < 1.0, s.field("adam_beta2"), "must be in [0, 1)");
  check(a.adam.epsilon > 0.0, s.field("adam_epsilon"), "must be > 0");
}

void read_federated(Section& s, fed::FedConfig& f) {
  s.read("round_period", f.round_period);
  s.read("client_fraction", f.client_fraction);
  s.read("param_bits", f.param_bits);
  s.read("centralized_downlink", f.centralized_downlink);
  s.finish();
  check(f.round_period >= 1, s.field("round_period"), "must be >= 1");
  check(f.client_fraction > 0.0 && f.client_fraction <= 1.0, s.field("client_fraction"),
        "must be in (0, 1], got " + fmt_value(f.client_fraction));
  check(f.param_bits == 32 || f.param_bits == 64, s.field("param_bits"), "must be 32 or 64");
}

Mode parse_mode(const std::string& text, Scenario scenario) {
  Mode m;
  if (text == "federated") return m;
  if (text == "centralized") {
    m.kind = Mode::Kind::Centralized;
    return m;
  }
  const std::string prefix = "baseline:";
  if (text.rfind(prefix, 0) == 0) {
    m.kind = Mode::Kind::Baseline;
    m.baseline = text.substr(prefix.size());
    const bool ok = scenario == Scenario::Caching ? caching::parse_cache_policy(m.baseline).has_value()
                                                  : offloading::parse_offload_baseline(m.baseline).has_value();
    check(ok, "mode",
          scenario == Scenario::Caching ? "caching baselines are lru, lfu, fifo" : "offloading baselines are mobile, edge, greedy");
    return m;
  }
  throw ConfigError("mode", "expected federated, centralized or baseline:<name>, got '" + text + "'");
}

}  // namespace

ExperimentSpec parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("parse error: ") + e.what());
  }

  ExperimentSpec spec;
  Section s(root, "");

  std::string scenario = "caching";
  s.read("scenario", scenario);
  if (scenario == "caching") {
    spec.scenario = Scenario::Caching;
  } else if (scenario == "offloading") {
    spec.scenario = Scenario::Offloading;
    spec.train_steps = 50'000;
    spec.eval_steps = 10'000;
  } else {
    throw ConfigError("scenario", "expected caching or offloading, got '" + scenario + "'");
  }

  std::string mode = "federated";
  s.read("mode", mode);
  spec.mode = parse_mode(mode, spec.scenario);

  s.read("seed", spec.seed);
  s.read("train_steps", spec.train_steps);
  s.read("eval_steps", spec.eval_steps);
  s.read("metrics_interval", spec.metrics_interval);
  s.read("output_dir", spec.output_dir);
  std::string format = "csv";
  s.read("format", format);
  if (format == "csv") {
    spec.format = MetricsFormat::Csv;
  } else if (format == "jsonl") {
    spec.format = MetricsFormat::Jsonl;
  } else {
    throw ConfigError("format", "expected csv or jsonl, got '" + format + "'");
  }
  s.read("write_checkpoint", spec.write_checkpoint);

  if (auto w = s.child("wireless")) read_wireless(*w, spec.offloading);
  if (auto c = s.child("caching")) read_caching(*c, spec.caching);
  if (auto o = s.child("offloading")) read_offloading(*o, spec.offloading);
  if (auto a = s.child("agent")) read_agent(*a, spec.agent);
  if (auto f = s.child("federated")) read_federated(*f, spec.fed);
  s.finish();

  check(spec.metrics_interval >= 1, "metrics_interval", "must be >= 1");
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string to_json(const ExperimentSpec& spec) {
  const auto& oc = spec.offloading;
  json j;
  j["scenario"] = std::string(to_string(spec.scenario));
  j["mode"] = spec.mode.name();
  j["seed"] = spec.seed;
  j["train_steps"] = spec.train_steps;
  j["eval_steps"] = spec.eval_steps;
  j["metrics_interval"] = spec.metrics_interval;
  j["output_dir"] = spec.output_dir;
  j["format"] = spec.format == MetricsFormat::Csv ? "csv" : "jsonl";
  j["write_checkpoint"] = spec.write_checkpoint;
  j["wireless"] = {{"total_bandwidth_hz", oc.wireless.total_bandwidth_hz},
                   {"num_channels", oc.wireless.num_channels},
                   {"noise_power_w", oc.wireless.noise_power_w},
                   {"gains", oc.channel.gains},
                   {"transition", oc.channel.transition}};
  j["caching"] = {{"num_nodes", spec.caching.num_nodes},         {"num_contents", spec.caching.num_contents},
                  {"zipf_alpha", spec.caching.zipf_alpha},       {"capacity", spec.caching.capacity},
                  {"freq_window", spec.caching.freq_window},     {"reshuffle_period", spec.caching.reshuffle_period},
                  {"lfu_always_admit", spec.caching.lfu_always_admit}};
  j["offloading"] = {{"num_ues", oc.num_ues},
                     {"input_bits", oc.task.input_bits},
                     {"cycles", oc.task.cycles},
                     {"arrival_prob", oc.ue.arrival_prob},
                     {"queue_capacity", oc.ue.queue_capacity},
                     {"energy_levels", oc.ue.energy_levels},
                     {"kappa", oc.ue.kappa},
                     {"epoch_seconds", oc.ue.epoch_seconds},
                     {"fail_deadline_epochs", oc.ue.fail_deadline_epochs},
                     {"energy_norm_j", oc.ue.energy_norm_j},
                     {"edge_cpu_hz", oc.edge.edge_cpu_hz},
                     {"weights",
                      {{"delay", oc.weights.delay},
                       {"energy", oc.weights.energy},
                       {"drop", oc.weights.drop},
                       {"fail", oc.weights.fail}}}};
  const auto& a = spec.agent;
  j["agent"] = {{"hidden_dim", a.hidden_dim},
                {"discount", a.discount},
                {"epsilon", a.epsilon},
                {"epsilon_anneal_steps", a.epsilon_anneal_steps},
                {"epsilon_start", a.epsilon_start},
                {"batch_size", a.batch_size},
                {"replay_capacity", a.replay_capacity},
                {"target_sync_period", a.target_sync_period},
                {"train_interval", a.train_interval},
                {"grad_clip", a.grad_clip},
                {"learning_rate", a.adam.learning_rate},
                {"adam_beta1", a.adam.beta1},
                {"adam_beta2", a.adam.beta2},
                {"adam_epsilon", a.adam.epsilon}};
  j["federated"] = {{"round_period", spec.fed.round_period},
                    {"client_fraction", spec.fed.client_fraction},
                    {"param_bits", spec.fed.param_bits},
                    {"centralized_downlink", spec.fed.centralized_downlink}};
  return j.dump(2);
}

}  // namespace edgefl
