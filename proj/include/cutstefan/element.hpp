#pragma once

#include "cutstefan/types.hpp"

#include <array>

namespace cutstefan {

/// Affine triangle with barycentric gradients (the P1 shape gradients).
struct P1Element {
  std::array<Vec2, 3> p;
  double area = 0.0;
  std::array<Vec2, 3> grad;

  P1Element() = default;
  explicit P1Element(const std::array<Vec2, 3>& vertices) : p(vertices) {
    area = signed_area(p[0], p[1], p[2]);
    const double inv = 1.0 / (2.0 * area);
    for (int i = 0; i < 3; ++i) {
      const Vec2& a = p[(i + 1) % 3];
      const Vec2& b = p[(i + 2) % 3];
      grad[i] = Vec2(a.y() - b.y(), b.x() - a.x()) * inv;
    }
  }

  Vec3 barycentric(const Vec2& x) const {
    const double l1 = grad[1].dot(x - p[0]);
    const double l2 = grad[2].dot(x - p[0]);
    return {1.0 - l1 - l2, l1, l2};
  }

  Vec2 point(const Vec3& l) const { return l[0] * p[0] + l[1] * p[1] + l[2] * p[2]; }
};

/// Quadratic Lagrange shape functions; order v0, v1, v2, then the midpoints
/// of the edges opposite v0, v1, v2.
inline std::array<double, 6> p2_values(const Vec3& l) {
  return {l[0] * (2 * l[0] - 1), l[1] * (2 * l[1] - 1), l[2] * (2 * l[2] - 1),
          4 * l[1] * l[2],       4 * l[2] * l[0],       4 * l[0] * l[1]};
}

inline std::array<Vec2, 6> p2_gradients(const Vec3& l, const std::array<Vec2, 3>& g) {
  return {(4 * l[0] - 1) * g[0],
          (4 * l[1] - 1) * g[1],
          (4 * l[2] - 1) * g[2],
          4 * (l[1] * g[2] + l[2] * g[1]),
          4 * (l[2] * g[0] + l[0] * g[2]),
          4 * (l[0] * g[1] + l[1] * g[0])};
}

} // namespace cutstefan
