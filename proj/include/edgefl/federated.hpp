#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgefl/agent.hpp"
#include "edgefl/rng.hpp"

namespace edgefl::fed {

struct ClientUpdate {
  std::size_t client_id = 0;
  std::vector<double> params;
  std::uint64_t sample_count = 0;  // n_k, new transitions since the client's last upload
  std::uint64_t uplink_bits = 0;
};

/// Sample-weighted elementwise mean (unweighted when every n_k is zero). Updates are
/// combined in client-id order, so the result is bit-identical under any permutation.
std::vector<double> fedavg(std::span<const ClientUpdate> updates);

std::size_t participants_per_round(std::size_t num_clients, double fraction);

/// Sorted uniform sample without replacement of participants_per_round(K, Cf) ids.
std::vector<std::size_t> sample_clients(std::size_t num_clients, double fraction, Rng& rng);

struct FedConfig {
  std::size_t round_period = 2500;
  double client_fraction = 1.0;
  std::size_t param_bits = 64;
  /// Charge a model download per client at the end of centralized training.
  bool centralized_downlink = false;

  void validate() const;
};

/// Exact bit accounting for both training modes.
struct CommsLedger {
  std::uint64_t federated_uplink_bits = 0;
  std::uint64_t federated_downlink_bits = 0;
  std::uint64_t centralized_uplink_bits = 0;
  std::uint64_t centralized_downlink_bits = 0;

  /// Bits to ship one transition: two state vectors plus action, reward and terminal flag.
  static std::uint64_t transition_bits(std::size_t state_dim, std::size_t value_bits = 64) {
    return (2 * state_dim + 3) * value_bits;
  }
  static std::uint64_t model_bits(std::size_t param_count, std::size_t value_bits = 64) {
    return param_count * value_bits;
  }
};

/// An environment that can be stepped with whatever agent is driving it. Implementations
/// keep their own random streams and metrics.
class EnvDriver {
 public:
  virtual ~EnvDriver() = default;
  /// Take one environment step acting with `agent`. Returns the transition it completed, if
  /// any; an environment may fold steps without a decision into a longer transition.
  virtual std::optional<rl::Transition> step(rl::DqnAgent& agent) = 0;
  /// Called with the loss of a gradient step triggered by this driver's transition.
  virtual void record_loss(double /*loss*/) {}
};

/// A learning client: its environment, its agent, and its upload bookkeeping.
struct FedClient {
  std::size_t id = 0;
  EnvDriver* env = nullptr;
  rl::DqnAgent* agent = nullptr;
  std::uint64_t pending_samples = 0;
};

struct ClientRoundReport {
  std::size_t client_id = 0;
  bool participated = false;
  std::uint64_t received_checksum = 0;  // MainNet digest right after download
  std::uint64_t sample_count = 0;
  std::size_t train_steps = 0;
  double mean_loss = 0.0;
};

struct RoundReport {
  std::size_t round = 0;
  std::uint64_t server_checksum = 0;
  std::uint64_t merged_checksum = 0;
  std::uint64_t uplink_bits = 0;
  std::uint64_t downlink_bits = 0;
  std::vector<ClientRoundReport> clients;  // ordered by client id
};

struct RoundResult {
  std::vector<double> merged;
  RoundReport report;
};

/// Raised when a client fails mid-round; carries the client id.
class ClientError : public std::runtime_error {
 public:
  ClientError(std::size_t client_id, const std::string& what)
      : std::runtime_error("client " + std::to_string(client_id) + ": " + what), client_id_(client_id) {}
  std::size_t client_id() const noexcept { return client_id_; }

 private:
  std::size_t client_id_;
};

/// One federated round: sampled participants download `server_params`, every client runs
/// `steps` local environment steps with training, participants upload, and the uploads are
/// merged with fedavg. Non-participants keep training on their local model.
RoundResult fed_round(std::span<const double> server_params, std::span<FedClient> clients, const FedConfig& config,
                      std::size_t steps, CommsLedger& ledger, Rng& sampler, std::size_t round_index = 0);

/// Push `params` to every client (charged as federated downlink).
void broadcast_model(std::span<const double> params, std::span<FedClient> clients, const FedConfig& config,
                     CommsLedger& ledger);

/// Centralized comparator: every environment steps with the one shared agent, each
/// transition is charged as uplink and lands in the shared replay buffer.
void centralized_train(std::span<EnvDriver* const> envs, rl::DqnAgent& agent, std::size_t steps,
                       const FedConfig& config, CommsLedger& ledger);

}  // namespace edgefl::fed
