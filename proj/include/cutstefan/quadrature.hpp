#pragma once

#include "cutstefan/types.hpp"

#include <span>

namespace cutstefan {

/// Triangle rule point in barycentric coordinates; weights sum to one.
struct TriangleQp {
  double l0, l1, l2;
  double w;
};

/// Segment rule point on [0,1]; weights sum to one.
struct SegmentQp {
  double s;
  double w;
};

/// Smallest tabulated rule exact for polynomials of the given degree (1..5).
std::span<const TriangleQp> triangle_rule(int degree);

/// Gauss-Legendre rule with n points (1..4), exact to degree 2n-1.
std::span<const SegmentQp> gauss_rule(int n_points);

inline Vec2 map_point(const TriangleQp& q, const Vec2& a, const Vec2& b, const Vec2& c) {
  return q.l0 * a + q.l1 * b + q.l2 * c;
}

} // namespace cutstefan
