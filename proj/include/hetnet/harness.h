#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hetnet/agents.h"
#include "hetnet/config.h"
#include "hetnet/nn.h"

namespace hetnet {

// Discrete level `action` of {0, p/(A-1), ..., p}. Throws std::out_of_range.
double action_to_power(int action, double p_max, int action_levels);

struct EpisodeMetrics {
  int episode = 0;
  double sum_rate = 0.0;        // mean over slots of the sum rate, bits/s/Hz
  double wmmse_sum_rate = 0.0;  // same channel realizations under WMMSE
  double ratio = 0.0;           // sum_rate / wmmse_sum_rate
  std::vector<double> agent_rewards;
};

struct EvalSummary {
  int episodes = 0;
  int slots = 0;
  double mean_sum_rate = 0.0;
  double std_sum_rate = 0.0;
  double mean_wmmse_sum_rate = 0.0;
  double mean_ratio = 0.0;  // mean of per-episode ratios
  double std_ratio = 0.0;
  EpisodeMetrics aggregate;  // means over the test episodes
  std::vector<EpisodeMetrics> per_episode;
};

// Greedy rollouts on the test environment. Test episode e always replays the
// same channel stream, so every evaluation point sees the same realizations.
class Evaluator {
 public:
  explicit Evaluator(const ExperimentConfig& config);

  // nets must hold one network per AP for learning algorithms; ignored
  // otherwise.
  EvalSummary evaluate(Algorithm algorithm, std::span<const DenseNet> nets);

  // Per-slot WMMSE sum rates over the whole test set, computed once.
  const std::vector<double>& wmmse_reference();

 private:
  ExperimentConfig config_;
  std::vector<double> wmmse_rates_;
};

struct TrainingRun {
  std::vector<EpisodeMetrics> metrics;  // one per evaluation point
  std::vector<Agent> agents;
  long slots_trained = 0;
};

// Receives each evaluation point as soon as it is computed.
using EvalCallback = std::function<void(const EpisodeMetrics&, std::span<const Agent>)>;

// Episodic training. Per slot: observe, epsilon-greedy act,
// step, store, one train step per agent. Evaluates after every
// eval_interval training episodes and after the last one. Non-learning
// algorithms skip training.
TrainingRun run_training(const ExperimentConfig& config, const EvalCallback& on_eval = {});

EvalSummary run_eval(const ExperimentConfig& config, std::span<const DenseNet> nets);

// Checkpoint file for one agent at one evaluation point.
std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t agent,
                                      Algorithm algorithm);
std::vector<DenseNet> load_checkpoints(const ExperimentConfig& config,
                                       const std::filesystem::path& dir);

// CSV: episode,slot_mean_sum_rate,wmmse_sum_rate,ratio,agent_0_reward,...
// Values carry 9 significant digits. An empty stream still gets the header
// when `agents` is given.
std::string metrics_csv(std::span<const EpisodeMetrics> metrics, std::size_t agents);
void emit_metrics(std::span<const EpisodeMetrics> metrics, std::size_t agents,
                  const std::filesystem::path& path);
std::vector<EpisodeMetrics> parse_metrics_csv(const std::string& text);

}  // namespace hetnet
