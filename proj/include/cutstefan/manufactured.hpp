#pragma once

#include "cutstefan/stefan_nitsche.hpp"

namespace cutstefan {

/// Radially symmetric one-phase solution with a growing circular hole
/// R(t) = log(alpha(t)), alpha(t) = 3 / (2 - 3t). Material lies outside the hole.
struct ManufacturedCase {
  MaterialParams material{1.0, 1.0, 1.0, 1.0, -0.01};
  Rect domain{{-1.5, -1.5}, {1.5, 1.5}};

  static double alpha(double t);
  static double radius(double t);
  /// -alpha(t): the hole grows, so the material boundary recedes.
  static double normal_speed(double t) { return -alpha(t); }

  double temperature(const Vec2& x, double t) const;
  Vec2 gradient(const Vec2& x, double t) const;
  double time_derivative(const Vec2& x, double t) const;
  double laplacian(const Vec2& x, double t) const;
  /// rho c dT/dt - k lap T; throws at the origin.
  double source(const Vec2& x, double t) const;
  double beam_amplitude(double t) const;
  /// A_ex(t) x / r.
  Vec2 beam(const Vec2& x, double t) const;
  double level_set(const Vec2& x, double t) const { return radius(t) - x.norm(); }

  /// Dirichlet data everywhere on the outer boundary, exact beam on the hole.
  ProblemSpec problem(double dt, double t0, double tf, const NitscheParams& nitsche = {}) const;
};

class ManufacturedBeam final : public BeamSource {
public:
  explicit ManufacturedBeam(ManufacturedCase c) : case_(c) {}
  Vec2 flux(const Vec2& x, double t, const Vec2&) const override { return case_.beam(x, t); }

private:
  ManufacturedCase case_;
};

} // namespace cutstefan
