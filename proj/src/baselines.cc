#include "hetnet/baselines.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hetnet/env.h"

namespace hetnet {

std::vector<double> full_power(const Topology& topology) { return topology.p_max; }

std::vector<double> random_power(const Topology& topology, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> p(topology.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = topology.p_max[k] * unit(rng);
  return p;
}

void WmmseConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("WMMSE needs at least one iteration");
  if (!(tolerance > 0.0)) throw std::invalid_argument("WMMSE tolerance must be positive");
}

namespace {

void check_inputs(const Eigen::MatrixXd& gains, std::span<const double> p_max,
                  double noise_power) {
  if (gains.rows() != gains.cols() || static_cast<std::size_t>(gains.rows()) != p_max.size()) {
    throw std::invalid_argument("WMMSE gain matrix must be K x K");
  }
  if (!gains.allFinite() || (gains.array() < 0.0).any()) {
    throw std::invalid_argument("WMMSE gains must be finite and non-negative");
  }
  if (!(noise_power > 0.0) || !std::isfinite(noise_power)) {
    throw std::invalid_argument("WMMSE noise power must be positive");
  }
  for (double p : p_max) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("WMMSE budget invalid");
  }
}

std::vector<double> squared(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return x * x; });
  return out;
}

}  // namespace

WmmseRun wmmse_from(const Eigen::MatrixXd& gains, std::span<const double> p_max,
                    double noise_power, std::vector<double> v, const WmmseConfig& config) {
  config.validate();
  check_inputs(gains, p_max, noise_power);
  const std::size_t k = p_max.size();
  const Eigen::MatrixXd amp = gains.cwiseSqrt();
  std::vector<double> u(k), w(k);

  WmmseRun run;
  double objective = sum_rate(gains, squared(v), noise_power);
  run.objective.push_back(objective);
  for (int it = 0; it < config.max_iterations; ++it) {
    for (std::size_t m = 0; m < k; ++m) {
      double received = noise_power;
      for (std::size_t j = 0; j < k; ++j) received += gains(m, j) * v[j] * v[j];
      u[m] = amp(m, m) * v[m] / received;
      // 1 / mse; mse = 1 - u h v > 0 since the noise term is positive.
      w[m] = 1.0 / (1.0 - u[m] * amp(m, m) * v[m]);
    }
    for (std::size_t j = 0; j < k; ++j) {
      double denom = 0.0;
      for (std::size_t m = 0; m < k; ++m) denom += w[m] * u[m] * u[m] * gains(m, j);
      const double cap = std::sqrt(p_max[j]);
      const double num = w[j] * u[j] * amp(j, j);
      v[j] = denom > 0.0 ? std::clamp(num / denom, 0.0, cap) : (num > 0.0 ? cap : 0.0);
    }
    const double next = sum_rate(gains, squared(v), noise_power);
    run.objective.push_back(next);
    const bool converged = std::fabs(next - objective) < config.tolerance;
    objective = next;
    if (converged) break;
  }
  run.powers = squared(v);
  for (std::size_t j = 0; j < k; ++j) run.powers[j] = std::min(run.powers[j], p_max[j]);
  return run;
}

WmmseResult wmmse_solve(const Eigen::MatrixXd& gains, std::span<const double> p_max,
                        double noise_power, const WmmseConfig& config) {
  check_inputs(gains, p_max, noise_power);
  const std::size_t k = p_max.size();
  std::vector<double> full(k);
  for (std::size_t j = 0; j < k; ++j) full[j] = std::sqrt(p_max[j]);

  std::vector<std::vector<double>> starts{full};
  if (config.multi_start && k > 1) {
    constexpr double kLow = 0.01;  // amplitude scale for a "turned down" link
    for (std::size_t j = 0; j < k; ++j) {
      auto s = full;
      s[j] *= kLow;
      starts.push_back(std::move(s));
    }
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> s(k);
      for (std::size_t i = 0; i < k; ++i) s[i] = i == j ? full[i] : kLow * full[i];
      starts.push_back(std::move(s));
    }
  }

  WmmseResult result;
  result.sum_rate = -1.0;
  for (auto& start : starts) {
    WmmseRun run = wmmse_from(gains, p_max, noise_power, std::move(start), config);
    const double rate = sum_rate(gains, run.powers, noise_power);
    if (rate > result.sum_rate) {
      result.sum_rate = rate;
      result.powers = run.powers;
    }
    result.runs.push_back(std::move(run));
  }
  return result;
}

std::vector<double> wmmse(const Eigen::MatrixXcd& channel, std::span<const double> p_max,
                          double noise_power, const WmmseConfig& config) {
  return wmmse_solve(channel.cwiseAbs2(), p_max, noise_power, config).powers;
}

}  // namespace hetnet
