#include "edgefl/federated.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edgefl/errors.hpp"

namespace edgefl::fed {

std::vector<double> fedavg(std::span<const ClientUpdate> updates) {
  require(!updates.empty(), "fedavg: no updates");
  const std::size_t length = updates.front().params.size();
  for (const auto& u : updates) require(u.params.size() == length, "fedavg: parameter length mismatch");

  std::vector<const ClientUpdate*> ordered;
  ordered.reserve(updates.size());
  for (const auto& u : updates) ordered.push_back(&u);
  std::sort(ordered.begin(), ordered.end(), [](const ClientUpdate* a, const ClientUpdate* b) {
    if (a->client_id != b->client_id) return a->client_id < b->client_id;
    if (a->sample_count != b->sample_count) return a->sample_count < b->sample_count;
    return a->params < b->params;
  });

  double total = 0.0;
  for (const auto* u : ordered) total += static_cast<double>(u->sample_count);
  const bool unweighted = total == 0.0;
  if (unweighted) total = static_cast<double>(ordered.size());

  std::vector<double> merged(length, 0.0);
  for (const auto* u : ordered) {
    const double w = (unweighted ? 1.0 : static_cast<double>(u->sample_count)) / total;
    for (std::size_t i = 0; i < length; ++i) merged[i] += w * u->params[i];
  }
  return merged;
}

std::size_t participants_per_round(std::size_t num_clients, double fraction) {
  const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(num_clients)));
  return std::clamp<std::size_t>(n, 1, num_clients);
}

std::vector<std::size_t> sample_clients(std::size_t num_clients, double fraction, Rng& rng) {
  require(num_clients >= 1, "sample_clients: need at least one client");
  require(fraction > 0.0 && fraction <= 1.0, "sample_clients: fraction must be in (0,1]");
  const std::size_t k = participants_per_round(num_clients, fraction);
  std::vector<std::size_t> ids(num_clients);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k positions become the sample.
  for (std::size_t i = 0; i < k; ++i) std::swap(ids[i], ids[i + rng.uniform_index(num_clients - i)]);
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void FedConfig::validate() const {
  require(round_period >= 1, "FedConfig: round_period must be >= 1");
  require(client_fraction > 0.0 && client_fraction <= 1.0, "FedConfig: client_fraction must be in (0,1]");
  require(param_bits == 32 || param_bits == 64, "FedConfig: param_bits must be 32 or 64");
}

namespace {

struct LocalRun {
  std::size_t train_steps = 0;
  double loss_sum = 0.0;
};

LocalRun run_local(FedClient& client, std::size_t steps) {
  LocalRun run;
  try {
    for (std::size_t s = 0; s < steps; ++s) {
      const auto t = client.env->step(*client.agent);
      if (!t) continue;
      ++client.pending_samples;
      if (const auto loss = client.agent->observe(*t)) {
        client.env->record_loss(*loss);
        ++run.train_steps;
        run.loss_sum += *loss;
      }
    }
  } catch (const ClientError&) {
    throw;
  } catch (const std::exception& e) {
    throw ClientError(client.id, e.what());
  }
  return run;
}

}  // namespace

RoundResult fed_round(std::span<const double> server_params, std::span<FedClient> clients, const FedConfig& config,
                      std::size_t steps, CommsLedger& ledger, Rng& sampler, std::size_t round_index) {
  require(!clients.empty(), "fed_round: no clients");
  const std::size_t param_count = server_params.size();
  const std::uint64_t model_bits = CommsLedger::model_bits(param_count, config.param_bits);

  std::vector<FedClient*> by_id;
  for (auto& c : clients) by_id.push_back(&c);
  std::sort(by_id.begin(), by_id.end(), [](const FedClient* a, const FedClient* b) { return a->id < b->id; });

  RoundResult result;
  RoundReport& report = result.report;
  report.round = round_index;
  report.server_checksum = nn::checksum(server_params);

  const auto chosen = sample_clients(by_id.size(), config.client_fraction, sampler);
  std::vector<bool> participates(by_id.size(), false);
  for (auto i : chosen) participates[i] = true;

  report.clients.resize(by_id.size());
  for (std::size_t i = 0; i < by_id.size(); ++i) {
    FedClient& c = *by_id[i];
    require(c.agent->main_net().shape().param_count() == param_count, "fed_round: client model shape mismatch");
    ClientRoundReport& cr = report.clients[i];
    cr.client_id = c.id;
    cr.participated = participates[i];
    if (participates[i]) {
      c.agent->load_parameters(server_params);
      cr.received_checksum = nn::checksum(c.agent->main_net().values());
      report.downlink_bits += model_bits;
    }
  }

  for (std::size_t i = 0; i < by_id.size(); ++i) {
    const LocalRun run = run_local(*by_id[i], steps);
    report.clients[i].train_steps = run.train_steps;
    report.clients[i].mean_loss = run.train_steps ? run.loss_sum / static_cast<double>(run.train_steps) : 0.0;
  }

  std::vector<ClientUpdate> updates;
  for (std::size_t i = 0; i < by_id.size(); ++i) {
    if (!participates[i]) continue;
    FedClient& c = *by_id[i];
    updates.push_back(ClientUpdate{c.id, c.agent->main_net().flat(), c.pending_samples, model_bits});
    report.clients[i].sample_count = c.pending_samples;
    c.pending_samples = 0;
    report.uplink_bits += model_bits;
  }

  result.merged = fedavg(updates);
  report.merged_checksum = nn::checksum(result.merged);
  ledger.federated_uplink_bits += report.uplink_bits;
  ledger.federated_downlink_bits += report.downlink_bits;
  return result;
}

void broadcast_model(std::span<const double> params, std::span<FedClient> clients, const FedConfig& config,
                     CommsLedger& ledger) {
  for (auto& c : clients) {
    c.agent->load_parameters(params);
    ledger.federated_downlink_bits += CommsLedger::model_bits(params.size(), config.param_bits);
  }
}

void centralized_train(std::span<EnvDriver* const> envs, rl::DqnAgent& agent, std::size_t steps,
                       const FedConfig& config, CommsLedger& ledger) {
  if (steps == 0) return;
  const std::uint64_t record_bits = CommsLedger::transition_bits(agent.observation_dim(), config.param_bits);
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t i = 0; i < envs.size(); ++i) {
      std::optional<rl::Transition> t;
      try {
        t = envs[i]->step(agent);
      } catch (const std::exception& e) {
        throw ClientError(i, e.what());
      }
      if (!t) continue;
      ledger.centralized_uplink_bits += record_bits;
      if (const auto loss = agent.observe(*t)) envs[i]->record_loss(*loss);
    }
  }
  if (config.centralized_downlink) {
    ledger.centralized_downlink_bits +=
        envs.size() * CommsLedger::model_bits(agent.main_net().shape().param_count(), config.param_bits);
  }
}

}  // namespace edgefl::fed
