#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "hetnet/env.h"
#include "hetnet/rng.h"

namespace hetnet::testing {

// Direct gains near 1, cross gains spread over 10^[-1.5, 0.5]; strong
// interference is common so power control matters.
inline Eigen::MatrixXd random_gains(int k, Rng& rng) {
  std::uniform_real_distribution<double> direct(0.5, 1.5), cross(-1.5, 0.5);
  Eigen::MatrixXd g(k, k);
  for (int m = 0; m < k; ++m) {
    for (int j = 0; j < k; ++j) g(m, j) = m == j ? direct(rng) : std::pow(10.0, cross(rng));
  }
  return g;
}

// Best sum rate over the levels^K grid {0, p/(levels-1), ..., p}.
inline double grid_search_sum_rate(const Eigen::MatrixXd& gains, const std::vector<double>& p_max,
                                   double noise, int levels) {
  const int k = static_cast<int>(p_max.size());
  std::vector<int> idx(k, 0);
  std::vector<double> p(k, 0.0);
  double best = 0.0;
  while (true) {
    for (int i = 0; i < k; ++i) p[i] = p_max[i] * idx[i] / (levels - 1);
    best = std::max(best, sum_rate(gains, p, noise));
    int i = 0;
    while (i < k && ++idx[i] == levels) idx[i++] = 0;
    if (i == k) break;
  }
  return best;
}

}  // namespace hetnet::testing
