#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "hetnet/channel.h"

using namespace hetnet;

namespace {

// Direct power series with long double accumulation; used as oracle only
// for small arguments.
double j0_series_oracle(double x) {
  long double sum = 0.0L;
  long double fact = 1.0L;
  for (int k = 0; k < 40; ++k) {
    if (k > 0) fact *= k;
    sum += ((k % 2) ? -1.0L : 1.0L) * std::pow(static_cast<long double>(x) / 2.0L, 2 * k) /
           (fact * fact);
  }
  return static_cast<double>(sum);
}

Topology one_ap(double d_min, double d_max) {
  return Topology{{{0.0, 0.0}}, {1}, {1.0}, {d_min}, {d_max}};
}

}  // namespace

TEST_CASE("bessel_j0 examples") {
  CHECK(bessel_j0(0.0) == 1.0);
  CHECK(bessel_j0(1.2566) == doctest::Approx(j0_series_oracle(1.2566)).epsilon(1e-12));
  CHECK(bessel_j0(1.2566) == doctest::Approx(0.6425308189393591).epsilon(1e-9));
  CHECK(std::fabs(bessel_j0(2.404826)) < 1e-4);
}

TEST_CASE("bessel_j0 accuracy on |x| <= 20 against std::cyl_bessel_j") {
  double worst = 0.0;
  for (double x = -20.0; x <= 20.0; x += 0.01) {
    worst = std::max(worst, std::fabs(bessel_j0(x) - std::cyl_bessel_j(0.0, std::fabs(x))));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("correlation_coefficient") {
  CHECK(correlation_coefficient(0.0, 0.02) == 1.0);
  CHECK(correlation_coefficient(0.0, 5.0) == 1.0);
  CHECK(correlation_coefficient(10.0, 0.02) ==
        doctest::Approx(j0_series_oracle(0.4 * std::numbers::pi)).epsilon(1e-12));
  CHECK(correlation_coefficient(10.0, 0.02) == doctest::Approx(0.6425).epsilon(1e-4));
  const double fd = 2.404826 / (2.0 * std::numbers::pi * 0.02);
  CHECK(std::fabs(correlation_coefficient(fd, 0.02)) < 1e-4);
}

TEST_CASE("path_loss_db") {
  CHECK(path_loss_db(1000.0) == doctest::Approx(120.9).epsilon(1e-12));
  CHECK(path_loss_db(100.0) == doctest::Approx(83.3).epsilon(1e-12));
  CHECK(path_loss_db(10.0) == doctest::Approx(45.7).epsilon(1e-12));
  double prev = path_loss_db(1.0);
  for (double d = 1.5; d < 5000.0; d *= 1.1) {
    const double cur = path_loss_db(d);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("place_users") {
  Rng rng(7);
  SUBCASE("degenerate annulus") {
    const Topology t = one_ap(50.0, 50.0);
    for (int i = 0; i < 100; ++i) {
      const auto ud = place_users(t, rng);
      CHECK(distance(ud[0], t.ap_positions[0]) == doctest::Approx(50.0).epsilon(1e-12));
    }
  }
  SUBCASE("area-uniform mean distance and support") {
    const Topology t{{{300.0, -40.0}}, {2}, {0.1}, {10.0}, {100.0}};
    const double lo = 10.0, hi = 100.0;
    const double analytic = (2.0 / 3.0) * (hi * hi * hi - lo * lo * lo) / (hi * hi - lo * lo);
    double sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const double d = distance(place_users(t, rng)[0], t.ap_positions[0]);
      CHECK(d >= lo - 1e-9);
      CHECK(d <= hi + 1e-9);
      sum += d;
    }
    CHECK(sum / n == doctest::Approx(analytic).epsilon(0.02));
  }
}

TEST_CASE("build_large_scale") {
  Rng rng(3);
  const Topology t = one_ap(10.0, 2000.0);
  SUBCASE("pure path loss") {
    const std::vector<Point> far{{1000.0, 0.0}};
    CHECK(build_large_scale(t, far, 0.0, rng).beta(0, 0) ==
          doctest::Approx(std::pow(10.0, -12.09)).epsilon(1e-12));
    const std::vector<Point> near{{0.0, 100.0}};
    CHECK(build_large_scale(t, near, 0.0, rng).beta(0, 0) ==
          doctest::Approx(std::pow(10.0, -8.33)).epsilon(1e-12));
  }
  SUBCASE("zero shadowing is deterministic") {
    const std::vector<Point> ud{{123.0, 456.0}};
    Rng a(1), b(99);
    CHECK(build_large_scale(t, ud, 0.0, a).beta == build_large_scale(t, ud, 0.0, b).beta);
  }
  SUBCASE("shadowing spread in log domain") {
    const std::vector<Point> ud{{500.0, 0.0}};
    const int n = 10000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double l = std::log10(build_large_scale(t, ud, 8.0, rng).beta(0, 0));
      s += l;
      s2 += l * l;
    }
    const double mean = s / n;
    const double sd = std::sqrt(s2 / n - mean * mean);
    CHECK(sd == doctest::Approx(0.8).epsilon(0.03));
  }
  SUBCASE("all links positive and finite") {
    Topology two{{{0, 0}, {500, 0}}, {1, 2}, {1.0, 0.1}, {10, 10}, {1000, 200}};
    const auto ud = place_users(two, rng);
    const auto ls = build_large_scale(two, ud, 8.0, rng);
    CHECK(ls.beta.allFinite());
    CHECK((ls.beta.array() > 0.0).all());
  }
}

TEST_CASE("jakes_step") {
  SUBCASE("rho = 1 freezes the channel") {
    Rng rng(5);
    SmallScale s = init_small_scale(3, 1.0, rng);
    const Eigen::MatrixXcd before = s.g;
    for (int i = 0; i < 10; ++i) s = jakes_step(s, rng);
    CHECK(s.g == before);
    CHECK(s.rho == 1.0);
  }
  SUBCASE("rho = 0 decorrelates") {
    Rng rng(6);
    SmallScale s = init_small_scale(1, 0.0, rng);
    std::complex<double> acc = 0.0;
    double power = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const auto prev = s.g(0, 0);
      jakes_step_in_place(s, rng);
      acc += s.g(0, 0) * std::conj(prev);
      power += std::norm(s.g(0, 0));
    }
    CHECK(std::abs(acc / power) < 0.02);
  }
  SUBCASE("stationary power and lag-one correlation") {
    const double rho = correlation_coefficient(10.0, 0.02);
    Rng rng(8);
    SmallScale s = init_small_scale(1, rho, rng);
    std::complex<double> acc = 0.0;
    double power = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const auto prev = s.g(0, 0);
      jakes_step_in_place(s, rng);
      acc += s.g(0, 0) * std::conj(prev);
      power += std::norm(s.g(0, 0));
    }
    CHECK(power / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::fabs(acc.real() / power - rho) < 0.02);
  }
}

TEST_CASE("topology validation") {
  Topology t = one_ap(10.0, 100.0);
  CHECK_NOTHROW(t.validate());
  t.p_max[0] = 0.0;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t = one_ap(100.0, 10.0);
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t = one_ap(10.0, 100.0);
  t.tiers.push_back(2);
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}
