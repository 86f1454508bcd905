#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hetnet/agents.h"
#include "hetnet/baselines.h"
#include "hetnet/channel.h"

namespace hetnet {

enum class Algorithm { kPql, kIql, kHql, kFullPower, kRandom, kWmmse };

Algorithm parse_algorithm(std::string_view name);
std::string_view algorithm_name(Algorithm algorithm);
bool is_learning(Algorithm algorithm);

double dbm_to_watts(double dbm);

struct ExperimentConfig {
  std::string preset = "hetnet9";
  Topology topology;  // resolved from the preset unless given explicitly
  std::size_t neighbors = 4;
  int action_levels = 11;
  double doppler_hz = 10.0;
  double slot_seconds = 0.02;
  std::optional<double> rho;  // overrides J0(2 pi f_D T)
  double noise_dbm = -114.0;
  double shadowing_db = 8.0;
  double bandwidth_hz = 10e6;  // recorded only; rates are per Hz
  int slots_per_episode = 20;
  int train_episodes = 1000;
  int test_episodes = 200;
  int eval_interval = 50;
  Algorithm algorithm = Algorithm::kPql;
  // Hidden widths for tiers 1, 2, 3.
  std::array<std::vector<int>, 3> tier_hidden{{{128, 64}, {128, 64}, {128, 64}}};
  AgentConfig agent;
  WmmseConfig wmmse;
  std::uint64_t seed = 1;
  bool save_checkpoints = true;

  double noise_power_w() const { return dbm_to_watts(noise_dbm); }
  double correlation() const;
  // {input, hidden..., actions} for agent k.
  std::vector<int> layer_widths(std::size_t agent) const;

  void validate() const;
};

// "hetnet9", "hetnet13", "hetnet9-hetero".
Topology preset_topology(std::string_view preset);
ExperimentConfig preset_config(std::string_view preset);

// UTF-8 JSON object; unknown keys are rejected with std::invalid_argument.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

}  // namespace hetnet
