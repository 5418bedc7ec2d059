#pragma once

#include "cutstefan/levelset.hpp"

#include <span>
#include <vector>

namespace cutstefan {

/// Node whose distance (and carried value) is fixed before marching starts.
struct MarchSeed {
  int node;
  double distance;
  double value;
};

struct MarchResult {
  std::vector<double> distance;
  std::vector<double> value;
  std::vector<char> reached;
  /// Distances in the order nodes left the heap.
  std::vector<double> accepted_sequence;
  bool monotone = true;
};

/// Speed-one fast marching on a triangle mesh. Each accepted node takes the
/// eikonal distance from its upwind triangle or edge and the value carried
/// along the characteristic (linear interpolation at its foot point).
class FastMarcher {
public:
  FastMarcher(std::span<const Vec2> nodes, std::span<const std::array<int, 3>> triangles);

  MarchResult march(std::span<const MarchSeed> seeds,
                    double band = std::numeric_limits<double>::infinity()) const;

  int n_nodes() const { return static_cast<int>(nodes_.size()); }

private:
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<int> node_tri_offset_;
  std::vector<int> node_tri_;
};

struct ClosestPoint {
  int segment = -1;
  Vec2 point = Vec2::Zero();
  double distance = std::numeric_limits<double>::infinity();
};

/// Exact point-to-polyline projection accelerated by a uniform bucket grid.
class SegmentLocator {
public:
  SegmentLocator(std::span<const InterfaceSegment> segments, const Rect& bounds, double cell_size);

  ClosestPoint closest(const Vec2& x) const;
  bool empty() const { return segments_.empty(); }

private:
  std::vector<InterfaceSegment> segments_;
  Rect bounds_;
  double cell_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<int> bucket_offset_;
  std::vector<int> bucket_items_;
};

/// Closest point on segment [a,b] to x.
Vec2 project_to_segment(const Vec2& x, const Vec2& a, const Vec2& b);

} // namespace cutstefan
