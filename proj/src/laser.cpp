#include "cutstefan/laser.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cutstefan {

void FocalPath::validate() const {
  if (!(tf >= t0)) throw ConfigError("focal path needs t0 <= tf");
  if (kind == PathKind::Raster && !(t_change > 0.0)) {
    throw ConfigError("raster focal path needs t_change > 0");
  }
  if (kind == PathKind::Waypoints) {
    if (waypoints.empty()) throw ConfigError("waypoint focal path needs at least one waypoint");
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
      if (!(waypoints[i].first > waypoints[i - 1].first)) {
        throw ConfigError("waypoint times must be strictly increasing");
      }
    }
  }
}

Vec2 FocalPath::at(double t) const {
  t = std::clamp(t, t0, tf);
  switch (kind) {
  case PathKind::Fixed:
    return start;
  case PathKind::Raster: {
    const double s = t - t0;
    const double period = 2.0 * t_change;
    const double tau = s - std::floor(s / period) * period;
    const double travel = tau <= t_change ? tau : period - tau;
    return start + travel * velocity;
  }
  case PathKind::Waypoints: {
    if (t <= waypoints.front().first) return waypoints.front().second;
    if (t >= waypoints.back().first) return waypoints.back().second;
    const auto it = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                                     [](double v, const auto& w) { return v < w.first; });
    const auto& [t1, p1] = *it;
    const auto& [ta, pa] = *(it - 1);
    const double s = (t - ta) / (t1 - ta);
    return pa + s * (p1 - pa);
  }
  }
  return start;
}

void BeamSpec::validate() const {
  if (!(sigma > 0.0)) throw ConfigError("beam sigma must be positive");
  if (!(P0 >= 0.0)) throw ConfigError("pulse period P0 must be >= 0");
  if (!(epsilon > 0.0)) throw ConfigError("absorption constant epsilon must be positive");
  if (std::abs(e_ray.norm() - 1.0) > 1e-12) throw ConfigError("beam direction e_ray must be a unit vector");
  path.validate();
}

int pulse(double t, double P0) {
  if (P0 <= 0.0) return 1;
  return t - std::floor(t / P0) * P0 <= 0.5 * P0 ? 1 : 0;
}

double spatial_profile(const Vec2& x, double t, const BeamSpec& spec) {
  if (t < spec.t_on || t > spec.t_off) return 0.0;
  if (pulse(t, spec.P0) == 0) return 0.0;
  const Vec2 d = x - spec.path.at(t);
  const Vec2 p = d - d.dot(spec.e_ray) * spec.e_ray;
  const double s2 = spec.sigma * spec.sigma;
  return spec.A_amp / std::sqrt(2.0 * std::numbers::pi * s2) * std::exp(-p.squaredNorm() / (2.0 * s2));
}

double absorption_cos(double c, double eps) {
  c = std::clamp(c, -1.0, 1.0);
  if (c <= 0.0) return 0.0;
  const double num = 2 * c * c - 2 * eps * c + eps * eps;
  const double den = 2 * c * c + 2 * eps * c + eps * eps;
  return 1.0 - num / den;
}

double absorption(const Vec2& n_gamma, const BeamSpec& spec) {
  const double len = n_gamma.norm();
  if (len == 0.0) return 0.0;
  return absorption_cos(-n_gamma.dot(spec.e_ray) / len, spec.epsilon);
}

Vec2 beam_flux(const Vec2& x, double t, const Vec2& n_gamma, const BeamSpec& spec) {
  const double f = spatial_profile(x, t, spec);
  if (f == 0.0) return Vec2::Zero();
  return -absorption(n_gamma, spec) * f * spec.e_ray;
}

GaussianBeam::GaussianBeam(BeamSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

Vec2 GaussianBeam::flux(const Vec2& x, double t, const Vec2& n_gamma) const {
  return beam_flux(x, t, n_gamma, spec_);
}

} // namespace cutstefan
