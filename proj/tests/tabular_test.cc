#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hetnet/tabular.h"

using namespace hetnet;
using namespace hetnet::tabular;

namespace {

QTable row_table(const std::vector<double>& row, TabularParams p) {
  QTable t(2, static_cast<int>(row.size()), p);
  for (std::size_t a = 0; a < row.size(); ++a) {
    t(0, static_cast<int>(a)) = row[a];
    t(1, static_cast<int>(a)) = -static_cast<double>(a);
  }
  return t;
}

}  // namespace

TEST_CASE("iql_update") {
  SUBCASE("alpha 1, gamma 0 writes the reward") {
    QTable t(1, 2, {1.0, 0.0, 0.0, 1.0, 0.0});
    iql_update(t, {0, 1, 4.25, 0});
    CHECK(t(0, 1) == 4.25);
    CHECK(t(0, 0) == 0.0);
  }
  SUBCASE("zero TD error leaves the table") {
    QTable t(1, 2, {0.5, 0.0, 0.0, 1.0, 0.0}, 3.0);
    const QTable before = t;
    iql_update(t, {0, 0, 3.0, 0});
    CHECK(t == before);
  }
  SUBCASE("half step") {
    QTable t(1, 2, {0.5, 0.0, 0.0, 1.0, 0.0}, 1.0);
    iql_update(t, {0, 0, 3.0, 0});
    CHECK(t(0, 0) == 2.0);
  }
  SUBCASE("bootstrap from the next row") {
    QTable t(2, 2, {0.5, 0.0, 0.0, 1.0, 0.5});
    t(1, 1) = 4.0;
    iql_update(t, {0, 0, 1.0, 1});
    CHECK(t(0, 0) == doctest::Approx(1.5));
  }
}

TEST_CASE("pql_update") {
  const TabularParams p{0.1, 0.05, 0.2, 1.0, 0.0};
  SUBCASE("hand-evaluated example") {
    QTable t = row_table({1.0, 0.9, -5.0}, p);
    pql_update(t, {0, 0, 2.0, 0});
    CHECK(t(0, 0) == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(t(0, 1) == doctest::Approx(0.85).epsilon(1e-15));
    CHECK(t(0, 2) == -5.0);
  }
  SUBCASE("closed gate matches iql") {
    QTable a = row_table({1.0, 0.9, -5.0}, p), b = a;
    pql_update(a, {0, 0, 1.1, 0});
    iql_update(b, {0, 0, 1.1, 0});
    CHECK(a == b);
  }
  SUBCASE("beta 0 matches iql on random experiences") {
    TabularParams q = p;
    q.beta = 0.0;
    q.gamma = 0.5;
    Rng rng(1);
    std::uniform_int_distribution<int> obs(0, 3), act(0, 2);
    std::uniform_real_distribution<double> r(-3.0, 5.0);
    QTable a(4, 3, q), b(4, 3, q);
    for (int i = 0; i < 500; ++i) {
      const TabularExperience e{obs(rng), act(rng), r(rng), obs(rng)};
      pql_update(a, e);
      iql_update(b, e);
      CHECK(a == b);
    }
  }
  SUBCASE("only row z changes, penalized cells drop by exactly beta") {
    Rng rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      TabularParams q{0.3, 0.25, 0.1, 0.5, 0.0};
      QTable t(3, 4, q);
      for (int z = 0; z < 3; ++z)
        for (int a = 0; a < 4; ++a) t(z, a) = u(rng);
      const QTable before = t;
      const int z = trial % 3, act = trial % 4;
      const double reward = 3.0 * u(rng) + 1.0;
      pql_update(t, {z, act, reward, z});
      const double qmax = before.row_max(z);
      const bool c1 = reward - qmax > q.t1;
      for (int zz = 0; zz < 3; ++zz) {
        for (int a = 0; a < 4; ++a) {
          if (zz != z) {
            CHECK(t(zz, a) == before(zz, a));
          } else if (a == act) {
            CHECK(t(zz, a) == doctest::Approx(before(zz, a) + 0.3 * (reward - before(zz, a))));
          } else if (c1 && qmax - before(zz, a) < q.t2) {
            CHECK(t(zz, a) == before(zz, a) - 0.25);
          } else {
            CHECK(t(zz, a) == before(zz, a));
          }
        }
      }
    }
  }
  SUBCASE("deterministic") {
    QTable a = row_table({0.3, 0.2, 0.1}, p), b = a;
    for (int i = 0; i < 10; ++i) {
      pql_update(a, {0, i % 3, 1.0 + i, 1});
      pql_update(b, {0, i % 3, 1.0 + i, 1});
    }
    CHECK(a == b);
  }
}

TEST_CASE("matrix game play") {
  SUBCASE("greedy learners at truth keep the dominant action") {
    const MatrixGame game({2, 2}, {1, 0, 0, 4});
    std::vector<Learner> learners;
    for (int i = 0; i < 2; ++i) {
      QTable t(1, 2, {0.1, 0.0, 0.0, 1.0, 0.0});
      t(0, 1) = 4.0;
      learners.push_back({t, UpdateRule::kIql});
    }
    Rng rng(3);
    const auto r = play_matrix_game(game, learners, {50, 0.0, 0.0}, rng);
    for (std::size_t e = 0; e < 50; ++e) {
      CHECK(r.actions[e] == std::vector<int>{1, 1});
      CHECK(r.rewards[e] == 4.0);
    }
  }
  SUBCASE("alpha 0 freezes the tables") {
    const MatrixGame game = climbing_game();
    auto learners = make_learners(game, {0.0, 0.0, 2.0, 20.0, 0.0}, UpdateRule::kIql);
    const auto before = learners;
    Rng rng(4);
    play_matrix_game(game, learners, {200, 1.0, 0.0}, rng);
    for (std::size_t i = 0; i < learners.size(); ++i) CHECK(learners[i].table == before[i].table);
  }
  SUBCASE("arity mismatch throws") {
    const MatrixGame game = climbing_game();
    std::vector<Learner> one{{QTable(1, 3, {}), UpdateRule::kIql}};
    Rng rng(5);
    CHECK_THROWS_AS(play_matrix_game(game, one, {}, rng), std::invalid_argument);
  }
  SUBCASE("climbing game optimum") {
    const MatrixGame game = climbing_game();
    CHECK(game.best_joint_action() == std::vector<int>{0, 0});
    CHECK(game.reward({0, 1}) == -30.0);
    CHECK(game.reward({2, 2}) == 5.0);
  }
}

TEST_CASE("PQL reaches the climbing-game optimum more often than IQL") {
  const double pql = climbing_success_rate(UpdateRule::kPql, 20);
  const double iql = climbing_success_rate(UpdateRule::kIql, 20);
  MESSAGE("pql " << pql << " iql " << iql);
  CHECK(pql > iql);
}
