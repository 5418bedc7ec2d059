#include "cutstefan/manufactured.hpp"

#include <cmath>
#include <numbers>

namespace cutstefan {

namespace {

void check_time(double t) {
  if (!(t < 2.0 / 3.0)) throw Error("manufactured solution is only defined for t < 2/3");
}

double radius_of(const Vec2& x) {
  const double r = x.norm();
  if (r == 0.0) throw Error("manufactured solution is singular at the origin");
  return r;
}

} // namespace

double ManufacturedCase::alpha(double t) {
  check_time(t);
  return 3.0 / (2.0 - 3.0 * t);
}

double ManufacturedCase::radius(double t) { return std::log(alpha(t)); }

double ManufacturedCase::temperature(const Vec2& x, double t) const {
  const double a = alpha(t), R = std::log(a), r = x.norm();
  return -std::exp(r) + std::cos(std::numbers::pi * r / (2.0 * R)) + material.T_m + a;
}

Vec2 ManufacturedCase::gradient(const Vec2& x, double t) const {
  const double R = radius(t), r = radius_of(x), w = std::numbers::pi / (2.0 * R);
  const double Tr = -std::exp(r) - w * std::sin(w * r);
  return Tr * x / r;
}

double ManufacturedCase::time_derivative(const Vec2& x, double t) const {
  const double a = alpha(t), R = std::log(a), r = x.norm(), w = std::numbers::pi / (2.0 * R);
  // dR/dt = alpha, d(w)/dt = -w alpha / R
  return r * std::sin(w * r) * w * a / R + a * a;
}

double ManufacturedCase::laplacian(const Vec2& x, double t) const {
  const double R = radius(t), r = radius_of(x), w = std::numbers::pi / (2.0 * R);
  const double Tr = -std::exp(r) - w * std::sin(w * r);
  const double Trr = -std::exp(r) - w * w * std::cos(w * r);
  return Trr + Tr / r;
}

double ManufacturedCase::source(const Vec2& x, double t) const {
  return material.rho * material.c * time_derivative(x, t) - material.k * laplacian(x, t);
}

double ManufacturedCase::beam_amplitude(double t) const {
  const double a = alpha(t);
  return -((material.rho * material.L + 1.0) * a + std::numbers::pi / (2.0 * std::log(a)));
}

Vec2 ManufacturedCase::beam(const Vec2& x, double t) const {
  return beam_amplitude(t) * x / radius_of(x);
}

ProblemSpec ManufacturedCase::problem(double dt, double t0, double tf,
                                      const NitscheParams& nitsche) const {
  ProblemSpec s;
  s.material = material;
  s.nitsche = nitsche;
  const ManufacturedCase c = *this;
  s.f = [c](const Vec2& x, double t) { return c.source(x, t); };
  s.T_D = [c](const Vec2& x, double t) { return c.temperature(x, t); };
  s.T_0 = [c](const Vec2& x, double t) { return c.temperature(x, t); };
  s.beam = std::make_shared<ManufacturedBeam>(c);
  s.boundary = kAllDirichlet;
  s.dt = dt;
  s.t0 = t0;
  s.tf = tf;
  return s;
}

} // namespace cutstefan
