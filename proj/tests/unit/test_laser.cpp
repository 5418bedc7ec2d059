#include <doctest.h>

#include "cutstefan/laser.hpp"

#include <cmath>
#include <numbers>

using namespace cutstefan;

TEST_CASE("gaussian profile") {
  BeamSpec spec;
  spec.path.start = {1.0, 1.0};
  const double axis = spatial_profile({1.0, 0.4}, 0.0, spec);
  CHECK(axis == doctest::Approx(7.9788456).epsilon(1e-7));
  CHECK(spatial_profile({1.1, 0.4}, 0.0, spec) == doctest::Approx(std::exp(-0.5) * axis).epsilon(1e-14));
  CHECK(spatial_profile({1.0, -3.0}, 0.0, spec) == doctest::Approx(axis).epsilon(1e-15));

  spec.e_ray = Vec2(1.0, -1.0).normalized();
  const Vec2 along = spec.path.start + 0.37 * spec.e_ray;
  CHECK(spatial_profile(along, 0.0, spec) == doctest::Approx(axis).epsilon(1e-14));

  spec.t_off = 0.5;
  CHECK(spatial_profile(spec.path.start, 0.6, spec) == 0.0);
}

TEST_CASE("absorption") {
  CHECK(absorption_cos(1.0, 1.0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(absorption_cos(0.0, 1.0) == 0.0);
  CHECK(absorption_cos(-0.3, 1.0) == 0.0);
  CHECK(absorption_cos(1e-9, 2.0) < 1e-8);
  for (double eps : {0.01, 0.1, 1.0, 3.0, 50.0}) {
    for (int i = 0; i <= 2000; ++i) {
      const double a = absorption_cos(-1.0 + i * 1e-3, eps);
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
    }
  }
  BeamSpec spec;
  CHECK(absorption({0.0, 1.0}, spec) == doctest::Approx(0.8));
  CHECK(absorption({0.0, 3.7}, spec) == absorption({0.0, 1.0}, spec));
  CHECK(absorption({0.0, -1.0}, spec) == 0.0);
  CHECK(absorption({0.0, 0.0}, spec) == 0.0);
}

TEST_CASE("pulse") {
  CHECK(pulse(0.03, 0.1) == 1);
  CHECK(pulse(0.07, 0.1) == 0);
  CHECK(pulse(0.07, 0.0) == 1);
  CHECK(pulse(0.5, 1.0) == 1);
  CHECK(pulse(0.25, 0.5) == 1);

  // Duty cycle over whole periods.
  for (double P0 : {0.1, 0.01}) {
    const int n = 200000;
    const double T = 1.0;
    int on = 0;
    for (int i = 0; i < n; ++i) on += pulse((i + 0.5) * T / n, P0);
    CHECK(static_cast<double>(on) / n == doctest::Approx(0.5).epsilon(1e-3));
  }
}

TEST_CASE("focal path") {
  FocalPath path;
  path.kind = PathKind::Raster;
  path.tf = 1.6;
  CHECK((path.at(0.0) - Vec2(0.5, 1.0)).norm() == 0.0);
  CHECK((path.at(0.4 - 1e-12) - Vec2(2.5, 1.0)).norm() < 1e-10);
  CHECK((path.at(0.8) - Vec2(0.5, 1.0)).norm() < 1e-12);
  CHECK((path.at(0.6) - Vec2(1.5, 1.0)).norm() < 1e-12);
  CHECK((path.at(5.0) - path.at(1.6)).norm() == 0.0);

  FocalPath fixed;
  fixed.start = {1.5, 1.2};
  for (double t : {0.0, 0.3, 0.9, 7.0}) CHECK((fixed.at(t) - fixed.start).norm() == 0.0);

  FocalPath wp;
  wp.kind = PathKind::Waypoints;
  wp.waypoints = {{0.0, {0.0, 1.0}}, {1.0, {2.0, 1.0}}};
  CHECK((wp.at(0.25) - Vec2(0.5, 1.0)).norm() < 1e-15);
  wp.waypoints = {{1.0, {0.0, 1.0}}, {0.5, {2.0, 1.0}}};
  CHECK_THROWS_AS(wp.validate(), ConfigError);
}

TEST_CASE("beam flux") {
  BeamSpec spec;
  spec.path.start = {1.0, 1.0};
  const GaussianBeam beam(spec);
  const Vec2 I = beam.flux({1.02, 1.0}, 0.0, {0.0, 1.0});
  CHECK(I.dot(Vec2(0.0, 1.0)) > 0.0);
  CHECK(I.x() == 0.0);
  CHECK((beam.flux({1.02, 1.0}, 0.0, {0.0, 2.5}) - I).norm() < 1e-15);

  spec.P0 = 0.1;
  const GaussianBeam pulsed(spec);
  CHECK(pulsed.flux({1.0, 1.0}, 0.07, {0.0, 1.0}).norm() == 0.0);

  // Delivered power over one period: half of the continuous beam.
  auto power = [](const GaussianBeam& b) {
    double sum = 0.0;
    const int nt = 1000, nx = 600;
    for (int i = 0; i < nt; ++i) {
      const double t = (i + 0.5) * 0.1 / nt;
      for (int j = 0; j < nx; ++j) {
        const double x = (j + 0.5) * 3.0 / nx;
        sum += b.flux({x, 1.0}, t, {0.0, 1.0}).y() * (3.0 / nx) * (0.1 / nt);
      }
    }
    return sum;
  };
  CHECK(power(pulsed) == doctest::Approx(0.5 * power(beam)).epsilon(1e-3));

  BeamSpec bad;
  bad.sigma = 0.0;
  CHECK_THROWS_AS(GaussianBeam{bad}, ConfigError);
  bad = BeamSpec{};
  bad.e_ray = {0.0, -2.0};
  CHECK_THROWS_AS(GaussianBeam{bad}, ConfigError);
}
