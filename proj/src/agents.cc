#include "hetnet/agents.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hetnet {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::push(Experience e) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(e));
    return;
  }
  items_[head_] = std::move(e);
  head_ = (head_ + 1) % capacity_;
}

const Experience& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay index out of range");
  return items_[(head_ + i) % items_.size()];
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (items_.empty()) throw std::logic_error("cannot sample an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const Experience*> out(n);
  for (auto& p : out) p = &items_[pick(rng)];
  return out;
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "iql") return LossKind::kIql;
  if (name == "pql") return LossKind::kPql;
  if (name == "hql") return LossKind::kHql;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

std::string_view loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::kIql: return "iql";
    case LossKind::kPql: return "pql";
    case LossKind::kHql: return "hql";
  }
  return "?";
}

double EpsilonSchedule::operator()(long step) const {
  return std::max(1.0 - scale * std::pow(base, static_cast<double>(step)), floor);
}

double epsilon(const EpsilonSchedule& schedule, long step) { return schedule(step); }

void AgentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("agent config: " + what); };
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must lie in [0, 1]");
  if (!(beta_penalty >= 0.0)) fail("beta must be >= 0");
  if (!(t2 > 0.0)) fail("t2 must be > 0");
  if (!(hql_degraded_rate > 0.0 && hql_degraded_rate <= 1.0)) fail("hql rate must lie in (0, 1]");
  if (target_sync_period < 1) fail("target sync period must be >= 1");
  if (batch_size < 1) fail("batch size must be >= 1");
  if (replay_capacity < 1) fail("replay capacity must be >= 1");
  if (!(learning_rate > 0.0)) fail("learning rate must be > 0");
  if (!(epsilon.floor >= 0.0 && epsilon.floor <= 1.0)) fail("epsilon floor must lie in [0, 1]");
}

Agent make_agent(const std::vector<int>& widths, const AgentConfig& config, Rng& init_rng) {
  config.validate();
  Agent agent;
  agent.online = init_net(widths, init_rng);
  agent.target = agent.online;
  agent.adam = make_adam(agent.online, config.learning_rate);
  agent.buffer = ReplayBuffer(config.replay_capacity);
  agent.config = config;
  return agent;
}

double current_epsilon(const Agent& agent) {
  if (agent.epsilon_override) return *agent.epsilon_override;
  return agent.config.epsilon(agent.train_steps);
}

int greedy_action(const Eigen::VectorXd& q) {
  int best = 0;
  for (Eigen::Index a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = static_cast<int>(a);
  }
  return best;
}

int select_action(const Agent& agent, const Observation& obs, Rng& rng, bool exploring) {
  if (exploring) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < current_epsilon(agent)) {
      std::uniform_int_distribution<int> pick(0, agent.online.num_actions() - 1);
      return pick(rng);
    }
  }
  return greedy_action(agent.online.forward(obs));
}

double td_error(const Agent& agent, const Experience& e) {
  double bootstrap = 0.0;
  if (agent.config.gamma != 0.0) {
    bootstrap = agent.config.gamma * agent.target.forward(e.next_obs).maxCoeff();
  }
  return e.reward + bootstrap - agent.online.forward(e.obs)[e.action];
}

LossBreakdown evaluate_loss(const Agent& agent, LossKind kind,
                            std::span<const Experience* const> batch,
                            const LossBreakdown* frozen) {
  if (batch.empty()) throw std::invalid_argument("loss needs a non-empty batch");
  const auto& cfg = agent.config;
  const auto n = static_cast<Eigen::Index>(batch.size());
  const int actions = agent.online.num_actions();

  LossBreakdown out;
  out.inputs.resize(agent.online.input_size(), n);
  for (Eigen::Index b = 0; b < n; ++b) out.inputs.col(b) = batch[b]->obs;
  const Eigen::MatrixXd q = agent.online.forward_batch(out.inputs);

  Eigen::RowVectorXd bootstrap = Eigen::RowVectorXd::Zero(n);
  if (cfg.gamma != 0.0) {
    Eigen::MatrixXd next(agent.target.input_size(), n);
    for (Eigen::Index b = 0; b < n; ++b) next.col(b) = batch[b]->next_obs;
    bootstrap = cfg.gamma * agent.target.forward_batch(next).colwise().maxCoeff();
  }

  out.dq = Eigen::MatrixXd::Zero(actions, n);
  out.td.resize(n);
  out.weight.assign(n, 1.0);
  out.c1.assign(n, false);
  out.c2 = Eigen::MatrixXd::Zero(actions, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;

  for (Eigen::Index b = 0; b < n; ++b) {
    const Experience& e = *batch[b];
    if (e.action < 0 || e.action >= actions) throw std::out_of_range("experience action");
    const double target_value = e.reward + bootstrap[b];
    const double delta = target_value - q(e.action, b);
    out.td[b] = delta;

    double w = 1.0;
    if (kind == LossKind::kHql) {
      w = frozen ? frozen->weight[b] : (delta > 0.0 ? 1.0 : cfg.hql_degraded_rate);
    }
    out.weight[b] = w;
    total += w * delta * delta;
    out.dq(e.action, b) -= 2.0 * w * delta * inv_n;

    if (kind != LossKind::kPql) continue;
    const double q_max = q.col(b).maxCoeff();
    const bool c1 = frozen ? frozen->c1[b] : (target_value - q_max > cfg.t1_fraction * e.reward);
    out.c1[b] = c1;
    for (int a = 0; a < actions; ++a) {
      if (a == e.action) continue;
      const bool c2 = frozen ? frozen->c2(a, b) != 0.0 : (q_max - q(a, b) < cfg.t2);
      out.c2(a, b) = c2 ? 1.0 : 0.0;
      if (c1 && c2) {
        total += cfg.beta_penalty * q(a, b);
        out.dq(a, b) += cfg.beta_penalty * inv_n;
      }
    }
  }
  out.loss = total * inv_n;
  return out;
}

double iql_loss(const Agent& agent, std::span<const Experience* const> batch) {
  return evaluate_loss(agent, LossKind::kIql, batch).loss;
}

double pql_loss(const Agent& agent, std::span<const Experience* const> batch) {
  return evaluate_loss(agent, LossKind::kPql, batch).loss;
}

double hql_loss(const Agent& agent, std::span<const Experience* const> batch) {
  return evaluate_loss(agent, LossKind::kHql, batch).loss;
}

LossGradient loss_gradient(const Agent& agent, LossKind kind,
                           std::span<const Experience* const> batch) {
  const LossBreakdown parts = evaluate_loss(agent, kind, batch);
  return {parts.loss, agent.online.backward(parts.inputs, parts.dq)};
}

bool train_step(Agent& agent, Rng& rng) {
  if (agent.buffer.size() < agent.config.batch_size) return false;
  const auto batch = agent.buffer.sample(agent.config.batch_size, rng);
  const LossGradient lg = loss_gradient(agent, agent.config.loss, batch);
  adam_step(agent.online, agent.adam, lg.gradient);
  ++agent.train_steps;
  if (agent.train_steps % agent.config.target_sync_period == 0) agent.target = agent.online;
  return true;
}

}  // namespace hetnet
