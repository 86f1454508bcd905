#pragma once

#include <vector>

#include "hetnet/rng.h"

namespace hetnet::tabular {

struct TabularParams {
  double alpha = 0.1;  // learning rate, (0, 1] (0 allowed to freeze a learner)
  double beta = 0.0;   // penalty
  double t1 = 0.0;
  double t2 = 1.0;
  double gamma = 0.0;
};

struct TabularExperience {
  int obs = 0;
  int action = 0;
  double reward = 0.0;
  int next_obs = 0;
};

// Dense Q table indexed by (observation id, action id).
class QTable {
 public:
  QTable(int observations, int actions, TabularParams params, double initial = 0.0);

  double operator()(int obs, int action) const { return values_[index(obs, action)]; }
  double& operator()(int obs, int action) { return values_[index(obs, action)]; }

  int observations() const { return observations_; }
  int actions() const { return actions_; }
  const TabularParams& params() const { return params_; }
  double row_max(int obs) const;
  int greedy(int obs) const;  // lowest index on ties

  bool operator==(const QTable& other) const { return values_ == other.values_; }

 private:
  std::size_t index(int obs, int action) const;

  int observations_;
  int actions_;
  TabularParams params_;
  std::vector<double> values_;
};

// Q(z, a) += alpha (R + gamma max Q(z') - Q(z, a)).
void iql_update(QTable& table, const TabularExperience& e);

// IQL update on the taken action; every other action a' at z whose value
// is within t2 of the row max loses beta when the tuple beats the row max
// by more than t1. Gates read the table before any cell changes.
void pql_update(QTable& table, const TabularExperience& e);

enum class UpdateRule { kIql, kPql };

struct Learner {
  QTable table;
  UpdateRule rule = UpdateRule::kIql;
};

// Repeated single-state cooperative game with a shared reward.
class MatrixGame {
 public:
  MatrixGame(std::vector<int> actions_per_player, std::vector<double> rewards);

  int players() const { return static_cast<int>(actions_.size()); }
  int actions(int player) const { return actions_.at(player); }
  // joint[i] is player i's action; player 0 varies slowest.
  double reward(const std::vector<int>& joint) const;
  std::vector<int> best_joint_action() const;

 private:
  std::vector<int> actions_;
  std::vector<double> rewards_;
};

// Claus and Boutilier's climbing game: optimum (0, 0) guarded by -30
// miscoordination penalties.
MatrixGame climbing_game();

struct PlayOptions {
  int episodes = 1000;
  double epsilon_start = 1.0;  // linear decay to epsilon_end over the run
  double epsilon_end = 0.0;
};

struct PlayResult {
  std::vector<double> rewards;            // joint reward per episode
  std::vector<std::vector<int>> actions;  // joint action per episode
};

// Independent epsilon-greedy learners; each episode is one play of the game.
PlayResult play_matrix_game(const MatrixGame& game, std::vector<Learner>& learners,
                            const PlayOptions& options, Rng& rng);

std::vector<Learner> make_learners(const MatrixGame& game, const TabularParams& params,
                                   UpdateRule rule);

// Every learner's greedy action matches the game's best joint action.
bool greedy_is_optimal(const MatrixGame& game, const std::vector<Learner>& learners);

// Defaults used by the climbing-game comparison. IQL learners get beta = 0.
TabularParams climbing_params(UpdateRule rule);
PlayOptions climbing_options();

// Fraction of seeds 1..seeds whose learners end on the optimum, each seed
// playing on make_stream(seed, "matrix-game").
double climbing_success_rate(UpdateRule rule, int seeds);

}  // namespace hetnet::tabular
