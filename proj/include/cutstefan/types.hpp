#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cutstefan {

/// Geometric dimension of every mesh and field in the library.
inline constexpr int kDim = 2;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
public:
  using Error::Error;
};

class AssemblyError : public Error {
public:
  using Error::Error;
};

class SolverError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

} // namespace cutstefan
