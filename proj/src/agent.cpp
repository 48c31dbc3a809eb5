#include "edgefl/agent.hpp"

#include <cmath>

#include "edgefl/errors.hpp"

namespace edgefl::rl {

void AgentConfig::validate() const {
  require(hidden_dim >= 1, "AgentConfig: hidden_dim must be >= 1");
  require(discount >= 0.0 && discount < 1.0, "AgentConfig: discount must be in [0,1)");
  require(epsilon >= 0.0 && epsilon <= 1.0, "AgentConfig: epsilon must be in [0,1]");
  require(epsilon_start >= 0.0 && epsilon_start <= 1.0, "AgentConfig: epsilon_start must be in [0,1]");
  require(batch_size >= 1 && batch_size <= replay_capacity, "AgentConfig: batch_size must be in [1, replay_capacity]");
  require(target_sync_period >= 1, "AgentConfig: target_sync_period must be >= 1");
  require(train_interval >= 1, "AgentConfig: train_interval must be >= 1");
  require(grad_clip >= 0.0, "AgentConfig: grad_clip must be >= 0");
  require(adam.learning_rate > 0.0, "AgentConfig: learning_rate must be > 0");
}

std::size_t masked_argmax(std::span<const double> q, std::span<const std::uint8_t> valid_mask) {
  require(q.size() == valid_mask.size(), "masked_argmax: mask length mismatch");
  std::size_t best = q.size();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (valid_mask[i] && (best == q.size() || q[i] > q[best])) best = i;
  }
  require(best < q.size(), "masked_argmax: no valid action");
  return best;
}

std::size_t select_action(std::span<const double> q, double epsilon, std::span<const std::uint8_t> valid_mask,
                          Rng& rng) {
  const std::size_t best = masked_argmax(q, valid_mask);
  if (epsilon <= 0.0 || rng.uniform() >= epsilon) return best;
  std::size_t valid = 0;
  for (auto m : valid_mask) valid += m ? 1 : 0;
  std::size_t pick = rng.uniform_index(valid);
  for (std::size_t i = 0; i < valid_mask.size(); ++i) {
    if (valid_mask[i] && pick-- == 0) return i;
  }
  return best;
}

double ddqn_target(double reward, bool terminal, double gamma, std::span<const double> q_main_next,
                   std::span<const double> q_target_next, std::span<const std::uint8_t> next_valid_mask) {
  if (terminal) return reward;
  require(q_main_next.size() == q_target_next.size(), "ddqn_target: q vector length mismatch");
  const std::size_t a = masked_argmax(q_main_next, next_valid_mask);
  return reward + gamma * q_target_next[a];
}

DqnAgent::DqnAgent(std::size_t observation_dim, std::size_t action_count, const AgentConfig& config, Rng rng)
    : config_(config),
      rng_(rng),
      main_(nn::init_mlp(nn::MlpShape{observation_dim, config.hidden_dim, action_count}, rng_)),
      target_(main_),
      adam_(config.adam, main_.shape().param_count()),
      replay_(config.replay_capacity, observation_dim, action_count),
      grads_(main_.shape()) {
  config_.validate();
}

double DqnAgent::current_epsilon() const {
  if (config_.epsilon_anneal_steps == 0 || actions_taken_ >= config_.epsilon_anneal_steps) return config_.epsilon;
  const double frac = static_cast<double>(actions_taken_) / static_cast<double>(config_.epsilon_anneal_steps);
  return config_.epsilon_start + frac * (config_.epsilon - config_.epsilon_start);
}

std::size_t DqnAgent::act(std::span<const double> observation, std::span<const std::uint8_t> valid_mask) {
  const double eps = current_epsilon();
  ++actions_taken_;
  const auto q = nn::mlp_forward(main_, observation);
  return select_action(q, eps, valid_mask, rng_);
}

std::size_t DqnAgent::greedy_action(std::span<const double> observation,
                                    std::span<const std::uint8_t> valid_mask) const {
  return masked_argmax(nn::mlp_forward(main_, observation), valid_mask);
}

std::optional<double> DqnAgent::observe(const Transition& transition) {
  replay_.push(transition);
  if (++pending_transitions_ < config_.train_interval) return std::nullopt;
  pending_transitions_ = 0;
  const auto stats = train_step();
  if (!stats) return std::nullopt;
  return stats->loss;
}

std::optional<TrainStats> DqnAgent::train_step() {
  const std::size_t batch = config_.batch_size;
  if (replay_.size() < batch) return std::nullopt;

  const auto dim = static_cast<Eigen::Index>(replay_.state_dim());
  const auto rows = static_cast<Eigen::Index>(batch);
  Workspace& w = work_;
  w.states.resize(rows, dim);
  w.next_states.resize(rows, dim);
  w.slots.resize(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    w.slots[i] = rng_.uniform_index(replay_.size());
    const auto s = replay_.state(w.slots[i]);
    const auto ns = replay_.next_state(w.slots[i]);
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < dim; ++j) {
      w.states(r, j) = s[static_cast<std::size_t>(j)];
      w.next_states(r, j) = ns[static_cast<std::size_t>(j)];
    }
  }

  nn::mlp_forward_batch(main_, w.states, w.current);
  nn::mlp_forward_batch(main_, w.next_states, w.main_next);
  nn::mlp_forward_batch(target_, w.next_states, w.target_next);

  const auto actions = static_cast<Eigen::Index>(action_count());
  w.output_grad.setZero(rows, actions);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const std::size_t slot = w.slots[i];
    const std::uint32_t span = replay_.span(slot);
    const double gamma = span == 1 ? config_.discount : std::pow(config_.discount, static_cast<double>(span));
    const double y = ddqn_target(replay_.reward(slot), replay_.terminal(slot), gamma,
                                 {w.main_next.q.row(r).data(), action_count()},
                                 {w.target_next.q.row(r).data(), action_count()}, replay_.next_mask(slot));
    const auto a = static_cast<Eigen::Index>(replay_.action(slot));
    const double err = w.current.q(r, a) - y;
    loss += err * err;
    w.output_grad(r, a) = 2.0 * err / static_cast<double>(batch);
  }
  loss /= static_cast<double>(batch);
  if (!std::isfinite(loss)) throw NumericError("train_step: non-finite loss");

  nn::mlp_backward_batch(main_, w.states, w.current, w.output_grad, grads_, w.scratch);
  std::span<double> grads = grads_.values();
  if (config_.grad_clip > 0.0) {
    double norm2 = 0.0;
    for (double g : grads) norm2 += g * g;
    const double norm = std::sqrt(norm2);
    if (norm > config_.grad_clip) {
      const double scale = config_.grad_clip / norm;
      for (double& g : grads) g *= scale;
    }
  }
  nn::adam_step(main_.values(), grads, adam_);

  TrainStats stats{loss, false};
  ++train_steps_;
  if (++steps_since_sync_ >= config_.target_sync_period) {
    target_ = main_;
    steps_since_sync_ = 0;
    stats.target_synced = true;
  }
  return stats;
}

void DqnAgent::load_parameters(std::span<const double> values) {
  main_.assign(values);
  target_ = main_;
  steps_since_sync_ = 0;
}

}  // namespace edgefl::rl
