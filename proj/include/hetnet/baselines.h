#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/channel.h"
#include "hetnet/rng.h"

namespace hetnet {

std::vector<double> full_power(const Topology& topology);
// Each AP uniform on [0, p_max].
std::vector<double> random_power(const Topology& topology, Rng& rng);

struct WmmseConfig {
  int max_iterations = 500;
  double tolerance = 1e-6;  // absolute change of the base-2 sum rate
  // Besides the full-power start, also start from each link turned down
  // and from each link alone, and keep the best stationary point.
  bool multi_start = true;

  void validate() const;
};

struct WmmseRun {
  std::vector<double> powers;
  std::vector<double> objective;  // sum rate after each iteration; [0] is the start
};

struct WmmseResult {
  std::vector<double> powers;
  double sum_rate = 0.0;
  std::vector<WmmseRun> runs;  // runs[0] starts from full power
};

// Scalar WMMSE on power gains |h(m, k)|^2 (receiver m, transmitter k).
// Phases are absorbed, so only magnitudes enter. Throws
// std::invalid_argument on non-finite gains or non-positive noise.
WmmseResult wmmse_solve(const Eigen::MatrixXd& gains, std::span<const double> p_max,
                        double noise_power, const WmmseConfig& config = {});

// Single run from a caller-chosen amplitude start v (P = v^2).
WmmseRun wmmse_from(const Eigen::MatrixXd& gains, std::span<const double> p_max,
                    double noise_power, std::vector<double> start_amplitudes,
                    const WmmseConfig& config);

std::vector<double> wmmse(const Eigen::MatrixXcd& channel, std::span<const double> p_max,
                          double noise_power, const WmmseConfig& config = {});

}  // namespace hetnet
