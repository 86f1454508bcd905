#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/channel.h"
#include "hetnet/rng.h"

namespace hetnet {

// Flattened local view of one agent, length 2M + 3:
//   [gain, rate_self, interference_self, rate_n1, interference_n1, ...]
// Gain and interference enter in dB (dBm) and are affinely scaled; see
// observe().
using Observation = Eigen::VectorXd;

// For each AP, the M other-cell UD indices nearest to it.
struct NeighborMap {
  std::vector<std::vector<std::size_t>> lists;

  std::size_t agents() const { return lists.size(); }
  std::size_t m() const { return lists.empty() ? 0 : lists.front().size(); }
};

struct EnvConfig {
  double noise_power_w = 0.0;
  double shadow_sigma_db = 8.0;
  double rho = 0.0;
  std::size_t neighbors = 4;
};

struct EnvState {
  Topology topology;
  std::vector<Point> ud_positions;
  NeighborMap neighbors;
  LargeScale large_scale;
  SmallScale small_scale;
  std::vector<double> powers;
  std::vector<double> last_rates;
  std::vector<double> last_interference;
  int slot_index = 0;
  double noise_power = 0.0;
};

struct SinrResult {
  std::vector<double> sinr;
  std::vector<double> interference;  // interference plus noise, watts
};

struct StepResult {
  std::vector<double> rates;
  std::vector<double> rewards;
};

SinrResult compute_sinr(const LargeScale& large, const SmallScale& small,
                        std::span<const double> powers, double noise_power);
SinrResult compute_sinr(const Eigen::MatrixXd& gains, std::span<const double> powers,
                        double noise_power);

// log2(1 + sinr)
std::vector<double> compute_rates(std::span<const double> sinr);

double sum_rate(const Eigen::MatrixXd& gains, std::span<const double> powers,
                double noise_power);

// Ties in distance go to the lower UD index. Throws std::invalid_argument
// when m > K - 1.
NeighborMap build_neighbor_map(const Topology& topology, std::span<const Point> ud_positions,
                               std::size_t m);

// Feature scaling applied to raw measurements.
double gain_feature(double gain_linear);
double interference_feature(double interference_w);
double rate_feature(double rate);

Observation observe(const EnvState& state, std::size_t agent);
std::size_t observation_size(std::size_t neighbors);

// Mean of own rate and the neighbor rates.
double local_reward(std::span<const double> rates, const NeighborMap& neighbors,
                    std::size_t agent);
std::vector<double> local_rewards(std::span<const double> rates, const NeighborMap& neighbors);

// Transmits joint_powers over the current channel, records the measurements,
// then advances the fading to the next slot. Throws std::invalid_argument on
// out-of-budget powers.
StepResult step(EnvState& state, std::span<const double> joint_powers, Rng& rng);

// New UD drop, large-scale fading and small-scale state, followed by one
// full-power bootstrap slot so every agent has measurements to observe.
EnvState reset_episode(const Topology& topology, const EnvConfig& config, Rng& rng);

// |h(m, k)|^2 for the channel currently in effect.
Eigen::MatrixXd current_gains(const EnvState& state);

}  // namespace hetnet
