#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hetnet/agents.h"

using namespace hetnet;

namespace {

// Single-input net whose Q output is exactly `q` for every observation:
// zero weights, value bias = mean(q), advantage bias = q.
DenseNet constant_net(const std::vector<double>& q) {
  DenseNet net({1, static_cast<int>(q.size())});
  double mean = 0.0;
  for (double v : q) mean += v;
  mean /= static_cast<double>(q.size());
  net.bias(net.value_head())[0] = mean;
  for (std::size_t a = 0; a < q.size(); ++a) net.bias(net.advantage_head())[a] = q[a];
  return net;
}

Agent constant_agent(const std::vector<double>& q, AgentConfig cfg = {}) {
  Rng rng(0);
  Agent agent = make_agent({1, static_cast<int>(q.size())}, cfg, rng);
  agent.online = constant_net(q);
  agent.target = agent.online;
  return agent;
}

Experience tuple(int action, double reward) {
  return Experience{Eigen::VectorXd::Zero(1), action, reward, Eigen::VectorXd::Zero(1)};
}

double loss_of(const Agent& agent, LossKind kind, const std::vector<Experience>& items) {
  std::vector<const Experience*> batch;
  for (const auto& e : items) batch.push_back(&e);
  return evaluate_loss(agent, kind, batch).loss;
}

std::vector<Experience> random_batch(std::size_t n, int inputs, int actions, Rng& rng) {
  std::normal_distribution<double> d;
  std::uniform_int_distribution<int> act(0, actions - 1);
  std::vector<Experience> out(n);
  for (auto& e : out) {
    e.obs = Eigen::VectorXd::NullaryExpr(inputs, [&] { return d(rng); });
    e.next_obs = Eigen::VectorXd::NullaryExpr(inputs, [&] { return d(rng); });
    e.action = act(rng);
    e.reward = std::abs(d(rng)) * 2.0;
  }
  return out;
}

std::vector<const Experience*> pointers(const std::vector<Experience>& items) {
  std::vector<const Experience*> out;
  for (const auto& e : items) out.push_back(&e);
  return out;
}

}  // namespace

TEST_CASE("epsilon schedule") {
  const EpsilonSchedule s;
  CHECK(epsilon(s, 0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(epsilon(s, 1000000) == 0.01);
  double prev = epsilon(s, 0);
  for (long t = 1; t < 5000; ++t) {
    const double e = epsilon(s, t);
    CHECK(e <= prev);
    prev = e;
  }
}

TEST_CASE("select_action") {
  SUBCASE("tie goes to the lowest index") {
    const Agent agent = constant_agent({0.0, 5.0, 5.0});
    Rng rng(1);
    CHECK(select_action(agent, Eigen::VectorXd::Zero(1), rng, false) == 1);
    CHECK(greedy_action(Eigen::Vector3d(0.0, 5.0, 5.0)) == 1);
  }
  SUBCASE("epsilon 0 is greedy") {
    Rng init(2);
    Agent agent = make_agent({3, 8, 5}, {}, init);
    agent.epsilon_override = 0.0;
    Rng rng(3);
    std::normal_distribution<double> d;
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd z = Eigen::VectorXd::NullaryExpr(3, [&] { return d(rng); });
      CHECK(select_action(agent, z, rng, true) == greedy_action(agent.online.forward(z)));
    }
  }
  SUBCASE("epsilon 1 is uniform (chi-square, 10 dof, p = 0.001)") {
    Agent agent = constant_agent(std::vector<double>(11, 0.0));
    agent.epsilon_override = 1.0;
    Rng rng(4);
    std::vector<int> counts(11, 0);
    const int n = 10000;
    for (int i = 0; i < n; ++i) ++counts[select_action(agent, Eigen::VectorXd::Zero(1), rng, true)];
    const double expected = n / 11.0;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 29.59);
  }
}

TEST_CASE("td_error") {
  SUBCASE("gamma 0") {
    const Agent agent = constant_agent({1.0, 2.0});
    CHECK(td_error(agent, tuple(1, 3.5)) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(td_error(agent, tuple(0, 1.0)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  }
  SUBCASE("hand-built nets with bootstrap") {
    AgentConfig cfg;
    cfg.gamma = 0.5;
    Agent agent = constant_agent({1.0, 2.0}, cfg);
    agent.target = constant_net({3.0, 0.5});
    // 1 + 0.5 * 3 - 2 = 0.5
    CHECK(td_error(agent, tuple(1, 1.0)) == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("pql_loss crafted batches") {
  AgentConfig cfg;
  cfg.t1_fraction = 0.1;
  cfg.t2 = 1.0;
  cfg.beta_penalty = 0.05;
  const Agent agent = constant_agent({1.0, 0.9, -5.0}, cfg);
  // C1 open (1.0 > 0.2), C2 open only for action 1: 1 + 0.05 * 0.9
  CHECK(pql_loss(agent, pointers({tuple(0, 2.0)})) == doctest::Approx(1.045).epsilon(1e-12));
  // C1 closed (0.05 < 0.105)
  CHECK(pql_loss(agent, pointers({tuple(0, 1.05)})) == doctest::Approx(0.0025).epsilon(1e-10));
  const auto bd = evaluate_loss(agent, LossKind::kPql, pointers({tuple(0, 2.0)}));
  CHECK(bd.c1[0]);
  CHECK(bd.c2(1, 0) == 1.0);
  CHECK(bd.c2(2, 0) == 0.0);
  CHECK_THROWS_AS(pql_loss(agent, std::vector<const Experience*>{}), std::invalid_argument);
}

TEST_CASE("iql_loss and hql_loss") {
  const Agent agent = constant_agent({2.0, 0.5});
  CHECK(iql_loss(agent, pointers({tuple(0, 2.0), tuple(1, 0.5)})) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(iql_loss(agent, pointers({tuple(1, 2.0)})) == doctest::Approx(2.25).epsilon(1e-12));
  // delta = -1 -> degraded weight
  CHECK(hql_loss(agent, pointers({tuple(0, 1.0)})) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(hql_loss(agent, pointers({tuple(0, 2.0)})) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  const std::vector<Experience> items{tuple(0, 3.0), tuple(1, 2.0), tuple(1, 0.75)};
  const auto positive = pointers(items);
  CHECK(hql_loss(agent, positive) == iql_loss(agent, positive));
}

TEST_CASE("pql with beta 0 equals iql exactly") {
  Rng rng(5);
  AgentConfig cfg;
  cfg.beta_penalty = 0.0;
  Agent agent = make_agent({6, 12, 4}, cfg, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const auto items = random_batch(16, 6, 4, rng);
    const auto batch = pointers(items);
    CHECK(pql_loss(agent, batch) == iql_loss(agent, batch));
    CHECK(loss_gradient(agent, LossKind::kPql, batch).gradient ==
          loss_gradient(agent, LossKind::kIql, batch).gradient);
  }
}

TEST_CASE("C1 with gamma 0 reduces to R (1 - f) > max Q") {
  Rng rng(6);
  AgentConfig cfg;
  cfg.t1_fraction = 0.3;
  Agent agent = make_agent({4, 6, 5}, cfg, rng);
  for (int trial = 0; trial < 50; ++trial) {
    const auto items = random_batch(8, 4, 5, rng);
    const auto bd = evaluate_loss(agent, LossKind::kPql, pointers(items));
    for (std::size_t b = 0; b < items.size(); ++b) {
      const double qmax = agent.online.forward(items[b].obs).maxCoeff();
      CHECK(bd.c1[b] == (items[b].reward * (1.0 - cfg.t1_fraction) > qmax));
      for (Eigen::Index a = 0; a < bd.c2.rows(); ++a) {
        CHECK((bd.c2(a, b) == 0.0 || bd.c2(a, b) == 1.0));
      }
    }
  }
}

TEST_CASE("penalty gradient lowers the gated Q value") {
  AgentConfig cfg;
  Agent agent = constant_agent({1.0, 0.9, -5.0}, cfg);
  const std::vector<Experience> items{tuple(0, 2.0)};
  const auto batch = pointers(items);
  const auto pql = evaluate_loss(agent, LossKind::kPql, batch);
  const auto iql = evaluate_loss(agent, LossKind::kIql, batch);
  const Eigen::MatrixXd penalty_dq = pql.dq - iql.dq;
  const Eigen::VectorXd grad = agent.online.backward(pql.inputs, penalty_dq);
  const double before = agent.online.forward(Eigen::VectorXd::Zero(1))[1];
  agent.online.parameters() -= 0.1 * grad;
  CHECK(agent.online.forward(Eigen::VectorXd::Zero(1))[1] < before);
}

TEST_CASE("loss_gradient") {
  SUBCASE("zero TD error and closed gates give a zero gradient") {
    const Agent agent = constant_agent({1.0, 0.2, 0.0});
    for (LossKind kind : {LossKind::kIql, LossKind::kPql, LossKind::kHql}) {
      const auto g = loss_gradient(agent, kind, pointers({tuple(0, 1.0), tuple(2, 0.0)}));
      CHECK(g.gradient.cwiseAbs().maxCoeff() < 1e-15);
    }
  }
  SUBCASE("duplicating the batch leaves the mean gradient unchanged") {
    Rng rng(7);
    Agent agent = make_agent({5, 9, 4}, {}, rng);
    const auto items = random_batch(10, 5, 4, rng);
    auto doubled = items;
    doubled.insert(doubled.end(), items.begin(), items.end());
    for (LossKind kind : {LossKind::kIql, LossKind::kPql, LossKind::kHql}) {
      const auto g1 = loss_gradient(agent, kind, pointers(items));
      const auto g2 = loss_gradient(agent, kind, pointers(doubled));
      CHECK((g1.gradient - g2.gradient).cwiseAbs().maxCoeff() < 1e-14);
      CHECK(g1.loss == doctest::Approx(g2.loss).epsilon(1e-14));
    }
  }
  SUBCASE("finite differences with frozen gates") {
    Rng rng(8);
    AgentConfig cfg;
    cfg.gamma = 0.3;
    Agent agent = make_agent({5, 9, 7, 4}, cfg, rng);
    agent.target = init_net({5, 9, 7, 4}, rng);
    for (LossKind kind : {LossKind::kIql, LossKind::kPql, LossKind::kHql}) {
      const auto items = random_batch(12, 5, 4, rng);
      const auto batch = pointers(items);
      const auto frozen = evaluate_loss(agent, kind, batch);
      const Eigen::VectorXd grad = loss_gradient(agent, kind, batch).gradient;
      for (Eigen::Index i = 0; i < agent.online.parameter_count(); i += 7) {
        const double saved = agent.online.parameters()[i];
        agent.online.parameters()[i] = saved + 1e-5;
        const double up = evaluate_loss(agent, kind, batch, &frozen).loss;
        agent.online.parameters()[i] = saved - 1e-5;
        const double down = evaluate_loss(agent, kind, batch, &frozen).loss;
        agent.online.parameters()[i] = saved;
        CHECK(grad[i] == doctest::Approx((up - down) / 2e-5).epsilon(1e-4).scale(1e-6));
      }
    }
  }
}

TEST_CASE("replay buffer") {
  ReplayBuffer buffer(5);
  for (int i = 0; i < 8; ++i) buffer.push(tuple(0, static_cast<double>(i)));
  CHECK(buffer.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(buffer.at(i).reward == static_cast<double>(i + 3));
  Rng rng(9);
  for (const Experience* e : buffer.sample(100, rng)) CHECK(e->reward >= 3.0);
}

TEST_CASE("train_step") {
  AgentConfig cfg;
  cfg.batch_size = 4;
  cfg.target_sync_period = 3;
  cfg.replay_capacity = 50;
  Rng init(10);
  Agent agent = make_agent({3, 6, 4}, cfg, init);
  Rng data(11);
  SUBCASE("warm-up is a no-op") {
    for (const auto& e : random_batch(3, 3, 4, data)) agent.buffer.push(e);
    const Eigen::VectorXd before = agent.online.parameters();
    Rng rng(12);
    CHECK_FALSE(train_step(agent, rng));
    CHECK(agent.online.parameters() == before);
    CHECK(agent.train_steps == 0);
  }
  SUBCASE("target syncs on the period and updates are deterministic") {
    for (const auto& e : random_batch(20, 3, 4, data)) agent.buffer.push(e);
    Agent twin = agent;
    Rng r1(13), r2(13);
    for (int i = 1; i <= 3; ++i) {
      CHECK(train_step(agent, r1));
      CHECK(train_step(twin, r2));
      CHECK(agent.online.parameters() == twin.online.parameters());
      if (i < 3) CHECK(agent.target.parameters() != agent.online.parameters());
    }
    CHECK(agent.train_steps == 3);
    CHECK(agent.target.parameters() == agent.online.parameters());
  }
}
