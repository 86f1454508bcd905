#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/rng.h"

namespace hetnet {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

// Access-point layout. AP k serves UD k; UD k is dropped in the annulus
// [d_min[k], d_max[k]] around AP k.
struct Topology {
  std::vector<Point> ap_positions;
  std::vector<int> tiers;      // 1 = macro, 2 and 3 = small cells
  std::vector<double> p_max;   // watts
  std::vector<double> d_min;   // meters
  std::vector<double> d_max;   // meters

  std::size_t size() const { return ap_positions.size(); }

  // Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

// beta(m, k): linear power gain from AP k to UD m.
struct LargeScale {
  Eigen::MatrixXd beta;
};

// g(m, k): unit-variance complex Rayleigh amplitude from AP k to UD m.
struct SmallScale {
  Eigen::MatrixXcd g;
  double rho = 0.0;
};

// J0 with |error| <= 1e-6 on finite input. Power series below |x| = 8,
// rational/asymptotic form beyond.
double bessel_j0(double x);

// Jakes lag-one correlation J0(2 pi f_d T).
double correlation_coefficient(double doppler_hz, double slot_seconds);

// 120.9 + 37.6 log10(d / 1 km), d in meters.
double path_loss_db(double distance_m);

// (x + iy) / sqrt(2) with x, y standard normal.
std::complex<double> complex_gaussian(Rng& rng);

std::vector<Point> place_users(const Topology& topology, Rng& rng);

LargeScale build_large_scale(const Topology& topology, std::span<const Point> ud_positions,
                             double shadow_sigma_db, Rng& rng);

// Stationary start: i.i.d. unit-variance entries.
SmallScale init_small_scale(std::size_t k, double rho, Rng& rng);

// g <- rho g + sqrt(1 - rho^2) i with fresh innovations for every link.
SmallScale jakes_step(SmallScale state, Rng& rng);
void jakes_step_in_place(SmallScale& state, Rng& rng);

// |h(m, k)|^2 = beta(m, k) |g(m, k)|^2.
Eigen::MatrixXd power_gains(const LargeScale& large, const SmallScale& small);

}  // namespace hetnet
