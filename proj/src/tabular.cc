#include "hetnet/tabular.h"

#include <algorithm>
#include <stdexcept>

namespace hetnet::tabular {

QTable::QTable(int observations, int actions, TabularParams params, double initial)
    : observations_(observations), actions_(actions), params_(params) {
  if (observations < 1 || actions < 1) throw std::invalid_argument("empty Q table");
  if (params.alpha < 0.0 || params.alpha > 1.0 || params.beta < 0.0 || params.t1 < 0.0 ||
      params.t2 < 0.0) {
    throw std::invalid_argument("Q table parameters out of range");
  }
  values_.assign(static_cast<std::size_t>(observations) * actions, initial);
}

std::size_t QTable::index(int obs, int action) const {
  if (obs < 0 || obs >= observations_ || action < 0 || action >= actions_) {
    throw std::out_of_range("Q table index");
  }
  return static_cast<std::size_t>(obs) * actions_ + action;
}

double QTable::row_max(int obs) const {
  const auto begin = values_.begin() + static_cast<std::ptrdiff_t>(index(obs, 0));
  return *std::max_element(begin, begin + actions_);
}

int QTable::greedy(int obs) const {
  int best = 0;
  for (int a = 1; a < actions_; ++a) {
    if ((*this)(obs, a) > (*this)(obs, best)) best = a;
  }
  return best;
}

void iql_update(QTable& table, const TabularExperience& e) {
  const auto& p = table.params();
  const double target = e.reward + p.gamma * table.row_max(e.next_obs);
  double& q = table(e.obs, e.action);
  q += p.alpha * (target - q);
}

void pql_update(QTable& table, const TabularExperience& e) {
  const auto& p = table.params();
  const double row_max = table.row_max(e.obs);
  const double target = e.reward + p.gamma * table.row_max(e.next_obs);
  const bool significant = target - row_max > p.t1;
  std::vector<bool> penalize(table.actions(), false);
  if (significant) {
    for (int a = 0; a < table.actions(); ++a) {
      penalize[a] = a != e.action && row_max - table(e.obs, a) < p.t2;
    }
  }
  double& q = table(e.obs, e.action);
  q += p.alpha * (target - q);
  for (int a = 0; a < table.actions(); ++a) {
    if (penalize[a]) table(e.obs, a) -= p.beta;
  }
}

MatrixGame::MatrixGame(std::vector<int> actions_per_player, std::vector<double> rewards)
    : actions_(std::move(actions_per_player)), rewards_(std::move(rewards)) {
  std::size_t joint = 1;
  for (int a : actions_) {
    if (a < 1) throw std::invalid_argument("every player needs an action");
    joint *= static_cast<std::size_t>(a);
  }
  if (actions_.empty() || rewards_.size() != joint) {
    throw std::invalid_argument("reward table must cover every joint action");
  }
}

double MatrixGame::reward(const std::vector<int>& joint) const {
  if (joint.size() != actions_.size()) throw std::invalid_argument("joint action arity");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < joint.size(); ++i) {
    if (joint[i] < 0 || joint[i] >= actions_[i]) throw std::out_of_range("joint action");
    idx = idx * actions_[i] + joint[i];
  }
  return rewards_[idx];
}

std::vector<int> MatrixGame::best_joint_action() const {
  const auto best = static_cast<std::size_t>(
      std::max_element(rewards_.begin(), rewards_.end()) - rewards_.begin());
  std::vector<int> joint(actions_.size());
  std::size_t rest = best;
  for (std::size_t i = actions_.size(); i-- > 0;) {
    joint[i] = static_cast<int>(rest % actions_[i]);
    rest /= actions_[i];
  }
  return joint;
}

MatrixGame climbing_game() {
  return MatrixGame({3, 3}, {11, -30, 0,  //
                             -30, 7, 6,   //
                             0, 0, 5});
}

PlayResult play_matrix_game(const MatrixGame& game, std::vector<Learner>& learners,
                            const PlayOptions& options, Rng& rng) {
  if (static_cast<int>(learners.size()) != game.players()) {
    throw std::invalid_argument("learner count must match game arity");
  }
  for (int i = 0; i < game.players(); ++i) {
    if (learners[i].table.actions() != game.actions(i)) {
      throw std::invalid_argument("learner action count must match the game");
    }
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PlayResult result;
  result.rewards.reserve(options.episodes);
  result.actions.reserve(options.episodes);
  std::vector<int> joint(learners.size());
  for (int ep = 0; ep < options.episodes; ++ep) {
    const double frac = options.episodes > 1 ? static_cast<double>(ep) / (options.episodes - 1) : 1.0;
    const double eps = options.epsilon_start + (options.epsilon_end - options.epsilon_start) * frac;
    for (std::size_t i = 0; i < learners.size(); ++i) {
      if (unit(rng) < eps) {
        std::uniform_int_distribution<int> pick(0, learners[i].table.actions() - 1);
        joint[i] = pick(rng);
      } else {
        joint[i] = learners[i].table.greedy(0);
      }
    }
    const double r = game.reward(joint);
    for (std::size_t i = 0; i < learners.size(); ++i) {
      const TabularExperience e{0, joint[i], r, 0};
      if (learners[i].rule == UpdateRule::kPql) {
        pql_update(learners[i].table, e);
      } else {
        iql_update(learners[i].table, e);
      }
    }
    result.rewards.push_back(r);
    result.actions.push_back(joint);
  }
  return result;
}

std::vector<Learner> make_learners(const MatrixGame& game, const TabularParams& params,
                                   UpdateRule rule) {
  std::vector<Learner> learners;
  for (int i = 0; i < game.players(); ++i) learners.push_back({QTable(1, game.actions(i), params), rule});
  return learners;
}

bool greedy_is_optimal(const MatrixGame& game, const std::vector<Learner>& learners) {
  const std::vector<int> best = game.best_joint_action();
  for (std::size_t i = 0; i < learners.size(); ++i) {
    if (learners[i].table.greedy(0) != best[i]) return false;
  }
  return true;
}

TabularParams climbing_params(UpdateRule rule) {
  return {0.1, rule == UpdateRule::kPql ? 1.0 : 0.0, 2.0, 20.0, 0.0};
}

PlayOptions climbing_options() { return {1000, 0.5, 0.0}; }

double climbing_success_rate(UpdateRule rule, int seeds) {
  const MatrixGame game = climbing_game();
  int hits = 0;
  for (int seed = 1; seed <= seeds; ++seed) {
    auto learners = make_learners(game, climbing_params(rule), rule);
    Rng rng = make_stream(static_cast<std::uint64_t>(seed), "matrix-game");
    play_matrix_game(game, learners, climbing_options(), rng);
    if (greedy_is_optimal(game, learners)) ++hits;
  }
  return static_cast<double>(hits) / seeds;
}

}  // namespace hetnet::tabular
