#pragma once

#include "cutstefan/types.hpp"

#include <memory>
#include <vector>

namespace cutstefan {

enum class PathKind { Fixed, Raster, Waypoints };

/// Focal point trajectory F(t).
struct FocalPath {
  PathKind kind = PathKind::Fixed;
  Vec2 start{0.5, 1.0};
  /// Raster: velocity reversed every t_change.
  Vec2 velocity{5.0, 0.0};
  double t_change = 0.4;
  /// Waypoints: (time, point), times increasing; linear in between.
  std::vector<std::pair<double, Vec2>> waypoints;
  double t0 = 0.0;
  double tf = 1.0;

  void validate() const;
  /// Queries outside [t0, tf] are clamped.
  Vec2 at(double t) const;
};

struct BeamSpec {
  double sigma = 0.1;
  double A_amp = 2.0;
  Vec2 e_ray{0.0, -1.0};
  FocalPath path;
  /// 0 means continuous.
  double P0 = 0.0;
  double epsilon = 1.0;
  double t_on = 0.0;
  double t_off = 1e300;

  void validate() const;
};

/// Gaussian spatial profile times the pulse gate, in 2D.
double spatial_profile(const Vec2& x, double t, const BeamSpec& spec);

/// Angle-dependent absorption; the normal is normalized first.
double absorption(const Vec2& n_gamma, const BeamSpec& spec);
double absorption_cos(double cos_theta, double epsilon);

/// 1 during the first half of each period (boundary included), else 0.
int pulse(double t, double P0);

/// I(x,t) = -A_p(theta) f(x,t) e_ray.
Vec2 beam_flux(const Vec2& x, double t, const Vec2& n_gamma, const BeamSpec& spec);

/// Heat flux source on the interface. The normal argument is the projected
/// interface normal used for the incidence angle.
class BeamSource {
public:
  virtual ~BeamSource() = default;
  virtual Vec2 flux(const Vec2& x, double t, const Vec2& n_gamma) const = 0;
};

class NoBeam final : public BeamSource {
public:
  Vec2 flux(const Vec2&, double, const Vec2&) const override { return Vec2::Zero(); }
};

class GaussianBeam final : public BeamSource {
public:
  explicit GaussianBeam(BeamSpec spec);
  Vec2 flux(const Vec2& x, double t, const Vec2& n_gamma) const override;
  const BeamSpec& spec() const { return spec_; }

private:
  BeamSpec spec_;
};

using BeamPtr = std::shared_ptr<const BeamSource>;

} // namespace cutstefan
