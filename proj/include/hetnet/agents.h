#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/env.h"
#include "hetnet/nn.h"
#include "hetnet/rng.h"

namespace hetnet {

struct Experience {
  Observation obs;
  int action = 0;
  double reward = 0.0;
  Observation next_obs;
};

// Fixed-capacity ring; the oldest entry is overwritten once full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Experience e);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  // i = 0 is the oldest retained entry.
  const Experience& at(std::size_t i) const;
  // Uniform with replacement.
  std::vector<const Experience*> sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  std::vector<Experience> items_;
};

enum class LossKind { kIql, kPql, kHql };

LossKind parse_loss_kind(std::string_view name);
std::string_view loss_kind_name(LossKind kind);

// epsilon(t) = max(1 - scale * base^t, floor)
struct EpsilonSchedule {
  double scale = 0.7;
  double base = 1.0005;
  double floor = 0.01;

  double operator()(long step) const;
};

struct AgentConfig {
  LossKind loss = LossKind::kPql;
  double gamma = 0.0;
  double beta_penalty = 0.05;
  double t1_fraction = 0.1;  // C1 threshold is t1_fraction * R of the same tuple
  double t2 = 1.0;
  EpsilonSchedule epsilon;
  long target_sync_period = 100;
  std::size_t batch_size = 128;
  std::size_t replay_capacity = 3600;
  double learning_rate = 1e-4;
  double hql_degraded_rate = 0.4;

  void validate() const;
};

struct Agent {
  DenseNet online;
  DenseNet target;
  AdamState adam;
  ReplayBuffer buffer{1};
  AgentConfig config;
  long train_steps = 0;
  // When set, overrides the schedule (tests pin exploration to 0 or 1).
  std::optional<double> epsilon_override;
};

Agent make_agent(const std::vector<int>& widths, const AgentConfig& config, Rng& init_rng);

double epsilon(const EpsilonSchedule& schedule, long step);
double current_epsilon(const Agent& agent);

// Lowest index wins ties.
int greedy_action(const Eigen::VectorXd& q);
int select_action(const Agent& agent, const Observation& obs, Rng& rng, bool exploring);

// R + gamma max_a' Q_target(z', a') - Q(z, a)
double td_error(const Agent& agent, const Experience& e);

// Per-sample quantities the losses are built from. Gates and max terms are
// constants with respect to the parameters.
struct LossBreakdown {
  double loss = 0.0;
  Eigen::MatrixXd inputs;  // obs, one column per sample
  Eigen::MatrixXd dq;      // dL/dQ(z, .) per sample
  std::vector<double> td;
  std::vector<double> weight;  // HQL per-sample weight, 1 otherwise
  std::vector<bool> c1;
  Eigen::MatrixXd c2;  // 1 where the unselected action is penalty-eligible
};

// With `frozen`, gates and HQL weights are reused instead of recomputed,
// which makes the loss a smooth function of the parameters for
// finite-difference checks.
LossBreakdown evaluate_loss(const Agent& agent, LossKind kind,
                            std::span<const Experience* const> batch,
                            const LossBreakdown* frozen = nullptr);

double iql_loss(const Agent& agent, std::span<const Experience* const> batch);
double pql_loss(const Agent& agent, std::span<const Experience* const> batch);
double hql_loss(const Agent& agent, std::span<const Experience* const> batch);

struct LossGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

// Batch-averaged loss and its exact gradient for the agent's online net.
LossGradient loss_gradient(const Agent& agent, LossKind kind,
                           std::span<const Experience* const> batch);

// No-op until the buffer holds a full batch. Otherwise one Adam step on a
// uniformly resampled mini-batch, then target sync every
// target_sync_period steps. Returns whether an update happened.
bool train_step(Agent& agent, Rng& rng);

}  // namespace hetnet
