#include "hetnet/env.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hetnet {

SinrResult compute_sinr(const Eigen::MatrixXd& gains, std::span<const double> powers,
                        double noise_power) {
  const auto k = static_cast<std::size_t>(gains.rows());
  if (powers.size() != k) throw std::invalid_argument("power vector size mismatch");
  SinrResult out{std::vector<double>(k), std::vector<double>(k)};
  for (std::size_t m = 0; m < k; ++m) {
    double interference = noise_power;
    for (std::size_t j = 0; j < k; ++j) {
      if (j != m) interference += gains(m, j) * powers[j];
    }
    out.interference[m] = interference;
    out.sinr[m] = gains(m, m) * powers[m] / interference;
  }
  return out;
}

SinrResult compute_sinr(const LargeScale& large, const SmallScale& small,
                        std::span<const double> powers, double noise_power) {
  return compute_sinr(power_gains(large, small), powers, noise_power);
}

std::vector<double> compute_rates(std::span<const double> sinr) {
  std::vector<double> rates(sinr.size());
  std::transform(sinr.begin(), sinr.end(), rates.begin(),
                 [](double s) { return std::log2(1.0 + s); });
  return rates;
}

double sum_rate(const Eigen::MatrixXd& gains, std::span<const double> powers,
                double noise_power) {
  const auto sinr = compute_sinr(gains, powers, noise_power).sinr;
  const auto rates = compute_rates(sinr);
  return std::accumulate(rates.begin(), rates.end(), 0.0);
}

NeighborMap build_neighbor_map(const Topology& topology, std::span<const Point> ud_positions,
                               std::size_t m) {
  const std::size_t k = topology.size();
  if (ud_positions.size() != k) throw std::invalid_argument("one UD per AP required");
  if (k == 0 || m > k - 1) throw std::invalid_argument("not enough other-cell UDs for M");
  NeighborMap map;
  map.lists.resize(k);
  for (std::size_t ap = 0; ap < k; ++ap) {
    std::vector<std::size_t> others;
    for (std::size_t u = 0; u < k; ++u) {
      if (u != ap) others.push_back(u);
    }
    const Point& origin = topology.ap_positions[ap];
    std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
      return distance(origin, ud_positions[a]) < distance(origin, ud_positions[b]);
    });
    others.resize(m);
    map.lists[ap] = std::move(others);
  }
  return map;
}

double gain_feature(double gain_linear) { return (10.0 * std::log10(gain_linear) + 110.0) / 40.0; }

double interference_feature(double interference_w) {
  return (10.0 * std::log10(interference_w) + 30.0 + 90.0) / 40.0;
}

double rate_feature(double rate) { return rate / 10.0; }

std::size_t observation_size(std::size_t neighbors) { return 2 * neighbors + 3; }

Observation observe(const EnvState& state, std::size_t agent) {
  const auto& list = state.neighbors.lists.at(agent);
  Observation z(static_cast<Eigen::Index>(observation_size(list.size())));
  const auto a = static_cast<Eigen::Index>(agent);
  const double direct = state.large_scale.beta(a, a) * std::norm(state.small_scale.g(a, a));
  z[0] = gain_feature(direct);
  Eigen::Index i = 1;
  auto push = [&](std::size_t ud) {
    z[i++] = rate_feature(state.last_rates[ud]);
    z[i++] = interference_feature(state.last_interference[ud]);
  };
  push(agent);
  for (std::size_t ud : list) push(ud);
  return z;
}

double local_reward(std::span<const double> rates, const NeighborMap& neighbors,
                    std::size_t agent) {
  const auto& list = neighbors.lists.at(agent);
  double total = rates[agent];
  for (std::size_t ud : list) total += rates[ud];
  return total / static_cast<double>(list.size() + 1);
}

std::vector<double> local_rewards(std::span<const double> rates, const NeighborMap& neighbors) {
  std::vector<double> out(neighbors.agents());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = local_reward(rates, neighbors, k);
  return out;
}

Eigen::MatrixXd current_gains(const EnvState& state) {
  return power_gains(state.large_scale, state.small_scale);
}

StepResult step(EnvState& state, std::span<const double> joint_powers, Rng& rng) {
  const std::size_t k = state.topology.size();
  if (joint_powers.size() != k) throw std::invalid_argument("joint power vector size mismatch");
  for (std::size_t i = 0; i < k; ++i) {
    const double p = joint_powers[i];
    if (!(p >= 0.0) || p > state.topology.p_max[i]) {
      throw std::invalid_argument("transmit power outside [0, p_max] for AP " + std::to_string(i));
    }
  }
  state.powers.assign(joint_powers.begin(), joint_powers.end());
  auto sinr = compute_sinr(state.large_scale, state.small_scale, state.powers, state.noise_power);
  StepResult out;
  out.rates = compute_rates(sinr.sinr);
  out.rewards = local_rewards(out.rates, state.neighbors);
  state.last_rates = out.rates;
  state.last_interference = std::move(sinr.interference);
  ++state.slot_index;
  jakes_step_in_place(state.small_scale, rng);
  return out;
}

EnvState reset_episode(const Topology& topology, const EnvConfig& config, Rng& rng) {
  topology.validate();
  if (!(config.noise_power_w > 0.0)) throw std::invalid_argument("noise power must be positive");
  EnvState state;
  state.topology = topology;
  state.noise_power = config.noise_power_w;
  state.ud_positions = place_users(topology, rng);
  state.neighbors = build_neighbor_map(topology, state.ud_positions, config.neighbors);
  state.large_scale =
      build_large_scale(topology, state.ud_positions, config.shadow_sigma_db, rng);
  state.small_scale = init_small_scale(topology.size(), config.rho, rng);
  state.slot_index = 0;
  step(state, topology.p_max, rng);
  return state;
}

}  // namespace hetnet
