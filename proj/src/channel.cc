#include "hetnet/channel.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hetnet {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void Topology::validate() const {
  const std::size_t k = ap_positions.size();
  if (k == 0) throw std::invalid_argument("topology has no access points");
  if (tiers.size() != k || p_max.size() != k || d_min.size() != k || d_max.size() != k) {
    throw std::invalid_argument("topology field lengths disagree");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(p_max[i] > 0.0) || !std::isfinite(p_max[i])) {
      throw std::invalid_argument("p_max must be positive for AP " + std::to_string(i));
    }
    if (!(d_min[i] > 0.0) || !(d_min[i] <= d_max[i]) || !std::isfinite(d_max[i])) {
      throw std::invalid_argument("invalid coverage annulus for AP " + std::to_string(i));
    }
    if (tiers[i] < 1 || tiers[i] > 3) {
      throw std::invalid_argument("tier must be 1, 2 or 3 for AP " + std::to_string(i));
    }
  }
}

double bessel_j0(double x) {
  const double ax = std::fabs(x);
  if (ax < 8.0) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
      term *= -q / (static_cast<double>(k) * k);
      sum += term;
      if (std::fabs(term) < 1e-17) break;
    }
    return sum;
  }
  const double z = 8.0 / ax;
  const double y = z * z;
  const double xx = ax - 0.785398164;
  const double p = 1.0 + y * (-0.1098628627e-2 +
                              y * (0.2734510407e-4 + y * (-0.2073370639e-5 + y * 0.2093887211e-6)));
  const double q = -0.1562499995e-1 +
                   y * (0.1430488765e-3 +
                        y * (-0.6911147651e-5 + y * (0.7621095161e-6 - y * 0.934935152e-7)));
  return std::sqrt(0.636619772 / ax) * (std::cos(xx) * p - z * std::sin(xx) * q);
}

double correlation_coefficient(double doppler_hz, double slot_seconds) {
  return bessel_j0(2.0 * std::numbers::pi * doppler_hz * slot_seconds);
}

double path_loss_db(double distance_m) { return 120.9 + 37.6 * std::log10(distance_m / 1000.0); }

std::complex<double> complex_gaussian(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double re = normal(rng);
  const double im = normal(rng);
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

std::vector<Point> place_users(const Topology& topology, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> users;
  users.reserve(topology.size());
  for (std::size_t k = 0; k < topology.size(); ++k) {
    const double lo = topology.d_min[k] * topology.d_min[k];
    const double hi = topology.d_max[k] * topology.d_max[k];
    const double r = std::sqrt(lo + (hi - lo) * unit(rng));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    const Point& ap = topology.ap_positions[k];
    users.push_back({ap.x + r * std::cos(theta), ap.y + r * std::sin(theta)});
  }
  return users;
}

LargeScale build_large_scale(const Topology& topology, std::span<const Point> ud_positions,
                             double shadow_sigma_db, Rng& rng) {
  const auto k = static_cast<Eigen::Index>(topology.size());
  if (ud_positions.size() != topology.size()) {
    throw std::invalid_argument("one UD per AP required");
  }
  std::normal_distribution<double> shadow(0.0, 1.0);
  LargeScale out{Eigen::MatrixXd(k, k)};
  for (Eigen::Index m = 0; m < k; ++m) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double d = distance(topology.ap_positions[j], ud_positions[m]);
      // Always draw so the stream position does not depend on sigma.
      const double x = shadow_sigma_db * shadow(rng);
      out.beta(m, j) = std::pow(10.0, -(path_loss_db(d) + x) / 10.0);
    }
  }
  return out;
}

SmallScale init_small_scale(std::size_t k, double rho, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(k);
  SmallScale s{Eigen::MatrixXcd(n, n), rho};
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index j = 0; j < n; ++j) s.g(m, j) = complex_gaussian(rng);
  }
  return s;
}

void jakes_step_in_place(SmallScale& state, Rng& rng) {
  const double innovation = std::sqrt(std::max(0.0, 1.0 - state.rho * state.rho));
  for (Eigen::Index m = 0; m < state.g.rows(); ++m) {
    for (Eigen::Index j = 0; j < state.g.cols(); ++j) {
      state.g(m, j) = state.rho * state.g(m, j) + innovation * complex_gaussian(rng);
    }
  }
}

SmallScale jakes_step(SmallScale state, Rng& rng) {
  jakes_step_in_place(state, rng);
  return state;
}

Eigen::MatrixXd power_gains(const LargeScale& large, const SmallScale& small) {
  return large.beta.cwiseProduct(small.g.cwiseAbs2());
}

}  // namespace hetnet
