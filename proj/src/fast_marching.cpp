#include "cutstefan/fast_marching.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

namespace cutstefan {

FastMarcher::FastMarcher(std::span<const Vec2> nodes,
                         std::span<const std::array<int, 3>> triangles)
    : nodes_(nodes.begin(), nodes.end()), triangles_(triangles.begin(), triangles.end()) {
  node_tri_offset_.assign(nodes_.size() + 1, 0);
  for (const auto& t : triangles_) {
    for (int v : t) ++node_tri_offset_[v + 1];
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) node_tri_offset_[i + 1] += node_tri_offset_[i];
  node_tri_.resize(node_tri_offset_.back());
  std::vector<int> fill(node_tri_offset_.begin(), node_tri_offset_.end() - 1);
  for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
    for (int v : triangles_[t]) node_tri_[fill[v]++] = t;
  }
}

namespace {

struct Candidate {
  double distance;
  double value;
};

// Minimizes d(P) + |C - P| over P on [A,B] with d linear along the edge.
// Returns nothing unless the minimizer respects causality (>= both ends).
bool two_point_update(const Vec2& a, double da, double va, const Vec2& b, double db, double vb,
                      const Vec2& c, Candidate& out) {
  const Vec2 e = b - a;
  const double len = e.norm();
  if (len == 0.0) return false;
  const double delta = db - da;
  if (std::abs(delta) >= len) return false;
  const Vec2 w = c - a;
  const double s0 = w.dot(e) / (len * len);
  const double rho = std::abs(cross(e, w)) / len;
  const double ratio = -delta / len;
  const double s = s0 + ratio * rho / std::sqrt(1.0 - ratio * ratio) / len;
  if (s <= 0.0 || s >= 1.0) return false;
  const double d = da + s * delta + (w - s * e).norm();
  if (d < std::max(da, db)) return false;
  out = {d, va + s * (vb - va)};
  return true;
}

} // namespace

MarchResult FastMarcher::march(std::span<const MarchSeed> seeds, double band) const {
  const int n = n_nodes();
  MarchResult r;
  r.distance.assign(n, std::numeric_limits<double>::infinity());
  r.value.assign(n, 0.0);
  r.reached.assign(n, 0);
  std::vector<char> accepted(n, 0);

  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

  for (const auto& s : seeds) {
    if (accepted[s.node] && r.distance[s.node] <= s.distance) continue;
    accepted[s.node] = 1;
    r.reached[s.node] = 1;
    r.distance[s.node] = s.distance;
    r.value[s.node] = s.value;
  }

  auto relax_from = [&](int p) {
    for (int k = node_tri_offset_[p]; k < node_tri_offset_[p + 1]; ++k) {
      const auto& t = triangles_[node_tri_[k]];
      for (int q : t) {
        if (q == p || accepted[q]) continue;
        int other = t[0];
        for (int v : t) {
          if (v != p && v != q) other = v;
        }
        Candidate best{r.distance[p] + (nodes_[q] - nodes_[p]).norm(), r.value[p]};
        if (accepted[other]) {
          Candidate c;
          if (two_point_update(nodes_[p], r.distance[p], r.value[p], nodes_[other],
                               r.distance[other], r.value[other], nodes_[q], c) &&
              c.distance < best.distance) {
            best = c;
          }
          const double via_other = r.distance[other] + (nodes_[q] - nodes_[other]).norm();
          if (via_other < best.distance) best = {via_other, r.value[other]};
        }
        if (best.distance < r.distance[q]) {
          r.distance[q] = best.distance;
          r.value[q] = best.value;
          heap.emplace(best.distance, q);
        }
      }
    }
  };

  for (int v = 0; v < n; ++v) {
    if (accepted[v]) relax_from(v);
  }

  double last = -std::numeric_limits<double>::infinity();
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (accepted[v] || d > r.distance[v]) continue;
    if (d > band) break;
    accepted[v] = 1;
    r.reached[v] = 1;
    r.accepted_sequence.push_back(d);
    if (d < last - 1e-12 * std::max(1.0, std::abs(last))) r.monotone = false;
    last = std::max(last, d);
    relax_from(v);
  }

  for (int v = 0; v < n; ++v) {
    if (!r.reached[v]) {
      r.distance[v] = std::numeric_limits<double>::infinity();
      r.value[v] = 0.0;
    }
  }
  return r;
}

Vec2 project_to_segment(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 e = b - a;
  const double ee = e.squaredNorm();
  if (ee == 0.0) return a;
  const double s = std::clamp((x - a).dot(e) / ee, 0.0, 1.0);
  return a + s * e;
}

SegmentLocator::SegmentLocator(std::span<const InterfaceSegment> segments, const Rect& bounds,
                               double cell_size)
    : segments_(segments.begin(), segments.end()), bounds_(bounds), cell_(cell_size) {
  if (!(cell_ > 0.0)) throw Error("segment locator needs a positive bucket size");
  nx_ = std::max(1, static_cast<int>(std::ceil(bounds_.width() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(bounds_.height() / cell_)));
  auto bucket_range = [&](const InterfaceSegment& s) {
    const double x0 = std::min(s.a.x(), s.b.x()), x1 = std::max(s.a.x(), s.b.x());
    const double y0 = std::min(s.a.y(), s.b.y()), y1 = std::max(s.a.y(), s.b.y());
    auto ix = [&](double x) {
      return std::clamp(static_cast<int>(std::floor((x - bounds_.lo.x()) / cell_)), 0, nx_ - 1);
    };
    auto iy = [&](double y) {
      return std::clamp(static_cast<int>(std::floor((y - bounds_.lo.y()) / cell_)), 0, ny_ - 1);
    };
    return std::array<int, 4>{ix(x0), ix(x1), iy(y0), iy(y1)};
  };
  bucket_offset_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  for (const auto& s : segments_) {
    const auto r = bucket_range(s);
    for (int j = r[2]; j <= r[3]; ++j)
      for (int i = r[0]; i <= r[1]; ++i) ++bucket_offset_[j * nx_ + i + 1];
  }
  for (std::size_t k = 1; k < bucket_offset_.size(); ++k) bucket_offset_[k] += bucket_offset_[k - 1];
  bucket_items_.resize(bucket_offset_.back());
  std::vector<int> fill(bucket_offset_.begin(), bucket_offset_.end() - 1);
  for (int id = 0; id < static_cast<int>(segments_.size()); ++id) {
    const auto r = bucket_range(segments_[id]);
    for (int j = r[2]; j <= r[3]; ++j)
      for (int i = r[0]; i <= r[1]; ++i) bucket_items_[fill[j * nx_ + i]++] = id;
  }
}

ClosestPoint SegmentLocator::closest(const Vec2& x) const {
  ClosestPoint best;
  if (segments_.empty()) return best;
  const double fx = (x.x() - bounds_.lo.x()) / cell_;
  const double fy = (x.y() - bounds_.lo.y()) / cell_;
  const int ci = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 1);
  const int cj = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 1);
  // Distance from x to its (clamped) home bucket; zero for points inside the grid.
  const double ox = std::max({0.0, bounds_.lo.x() + ci * cell_ - x.x(), x.x() - (bounds_.lo.x() + (ci + 1) * cell_)});
  const double oy = std::max({0.0, bounds_.lo.y() + cj * cell_ - x.y(), x.y() - (bounds_.lo.y() + (cj + 1) * cell_)});
  const double offset = std::hypot(ox, oy);

  auto visit = [&](int i, int j) {
    const int b = j * nx_ + i;
    for (int k = bucket_offset_[b]; k < bucket_offset_[b + 1]; ++k) {
      const int id = bucket_items_[k];
      const auto& s = segments_[id];
      const Vec2 p = project_to_segment(x, s.a, s.b);
      const double d = (p - x).norm();
      if (d < best.distance || (d == best.distance && id < best.segment)) {
        best = {id, p, d};
      }
    }
  };

  const int max_ring = std::max(nx_, ny_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    if (best.segment >= 0 && best.distance <= (ring - 1) * cell_ - offset) break;
    for (int j = cj - ring; j <= cj + ring; ++j) {
      if (j < 0 || j >= ny_) continue;
      if (j == cj - ring || j == cj + ring) {
        for (int i = std::max(0, ci - ring); i <= std::min(nx_ - 1, ci + ring); ++i) visit(i, j);
      } else {
        if (ci - ring >= 0) visit(ci - ring, j);
        if (ci + ring < nx_ && ring > 0) visit(ci + ring, j);
      }
    }
  }
  return best;
}

} // namespace cutstefan
