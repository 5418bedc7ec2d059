#include "cutstefan/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

namespace cutstefan {

Topology build_topology(const std::vector<Vec2>& vertices,
                        const std::vector<std::array<int, 3>>& triangles) {
  Topology topo;
  const auto n_cells = triangles.size();
  topo.cell_faces.resize(n_cells);
  topo.neighbors.assign(n_cells, {-1, -1, -1});
  topo.faces.reserve(n_cells * 3 / 2 + 16);

  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(n_cells * 2);
  auto key = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  };

  for (std::size_t c = 0; c < n_cells; ++c) {
    const auto& tri = triangles[c];
    for (int i = 0; i < 3; ++i) {
      const int a = tri[(i + 1) % 3];
      const int b = tri[(i + 2) % 3];
      auto [it, inserted] = lookup.try_emplace(key(a, b), static_cast<int>(topo.faces.size()));
      if (inserted) {
        Face f;
        f.vertices = {a, b};
        f.cells = {static_cast<int>(c), -1};
        const Vec2 d = vertices[b] - vertices[a];
        f.normal = Vec2(d.y(), -d.x()).normalized();
        topo.faces.push_back(f);
      } else {
        Face& f = topo.faces[it->second];
        if (f.cells[1] >= 0) {
          throw GeometryError("face shared by more than two triangles");
        }
        f.cells[1] = static_cast<int>(c);
      }
      topo.cell_faces[c][i] = it->second;
    }
  }

  for (std::size_t c = 0; c < n_cells; ++c) {
    for (int i = 0; i < 3; ++i) {
      const Face& f = topo.faces[topo.cell_faces[c][i]];
      if (f.interior()) {
        topo.neighbors[c][i] = f.cells[0] == static_cast<int>(c) ? f.cells[1] : f.cells[0];
      }
    }
  }
  return topo;
}

MeshPtr BackgroundMesh::build_structured(const Rect& domain, int nx, int ny, Diagonal diagonal) {
  if (nx < 1 || ny < 1) {
    throw GeometryError("structured mesh needs nx >= 1 and ny >= 1 (got " + std::to_string(nx) +
                        ", " + std::to_string(ny) + ")");
  }
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) {
    throw GeometryError("structured mesh needs a rectangle of positive area");
  }

  auto mesh = std::shared_ptr<BackgroundMesh>(new BackgroundMesh());
  mesh->domain_ = domain;
  mesh->diagonal_ = diagonal;
  mesh->nx_ = nx;
  mesh->ny_ = ny;

  const double dx = domain.width() / nx;
  const double dy = domain.height() / ny;
  auto& verts = mesh->vertices_;
  verts.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Pin the last row/column to the exact rectangle corner.
      const double x = i == nx ? domain.hi.x() : domain.lo.x() + i * dx;
      const double y = j == ny ? domain.hi.y() : domain.lo.y() + j * dy;
      verts.emplace_back(x, y);
    }
  }
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  auto& tris = mesh->triangles_;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = vid(i, j);
      const int b = vid(i + 1, j);
      const int c = vid(i + 1, j + 1);
      const int d = vid(i, j + 1);
      if (diagonal == Diagonal::Right) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else {
        const int e = static_cast<int>(verts.size());
        verts.emplace_back(0.25 * (verts[a] + verts[b] + verts[c] + verts[d]));
        tris.push_back({a, b, e});
        tris.push_back({b, c, e});
        tris.push_back({c, d, e});
        tris.push_back({d, a, e});
      }
    }
  }
  mesh->finalize();
  return mesh;
}

void BackgroundMesh::finalize() {
  topology_ = build_topology(vertices_, triangles_);

  interior_faces_.clear();
  exterior_faces_.clear();
  for (int f = 0; f < n_faces(); ++f) {
    Face& face = topology_.faces[f];
    if (face.interior()) {
      interior_faces_.push_back(f);
    } else {
      exterior_faces_.push_back(f);
      face.side = side_of(0.5 * (vertices_[face.vertices[0]] + vertices_[face.vertices[1]]));
    }
  }

  h_max_ = 0.0;
  h_min_ = std::numeric_limits<double>::infinity();
  for (int c = 0; c < n_cells(); ++c) {
    const double d = cell_diameter(c);
    h_max_ = std::max(h_max_, d);
    h_min_ = std::min(h_min_, d);
  }

  vertex_cells_.assign(vertices_.size(), {});
  for (int c = 0; c < n_cells(); ++c) {
    for (int v : triangles_[c]) vertex_cells_[v].push_back(c);
  }
  vertex_neighbors_.assign(vertices_.size(), {});
  for (const Face& f : topology_.faces) {
    vertex_neighbors_[f.vertices[0]].push_back(f.vertices[1]);
    vertex_neighbors_[f.vertices[1]].push_back(f.vertices[0]);
  }
  for (auto& nb : vertex_neighbors_) std::sort(nb.begin(), nb.end());

  // Regular refinement; child vertex ids coincide with P2 node ids.
  refined_.vertices = vertices_;
  refined_.vertices.reserve(n_p2_nodes());
  for (const Face& f : topology_.faces) {
    refined_.vertices.push_back(0.5 * (vertices_[f.vertices[0]] + vertices_[f.vertices[1]]));
  }
  refined_.triangles.clear();
  refined_.triangles.reserve(4 * triangles_.size());
  refined_.parent.clear();
  refined_.parent.reserve(4 * triangles_.size());
  for (int c = 0; c < n_cells(); ++c) {
    const auto n = p2_nodes(c);
    const int v0 = n[0], v1 = n[1], v2 = n[2], m0 = n[3], m1 = n[4], m2 = n[5];
    refined_.triangles.push_back({v0, m2, m1});
    refined_.triangles.push_back({m2, v1, m0});
    refined_.triangles.push_back({m1, m0, v2});
    refined_.triangles.push_back({m0, m1, m2});
    for (int k = 0; k < 4; ++k) refined_.parent.push_back(c);
  }
  refined_.topology = build_topology(refined_.vertices, refined_.triangles);
}

std::array<Vec2, 3> BackgroundMesh::cell_vertices(int cell) const {
  const auto& t = triangles_[cell];
  return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
}

double BackgroundMesh::cell_area(int cell) const {
  const auto p = cell_vertices(cell);
  return signed_area(p[0], p[1], p[2]);
}

double BackgroundMesh::cell_diameter(int cell) const {
  const auto p = cell_vertices(cell);
  return std::max({(p[1] - p[0]).norm(), (p[2] - p[1]).norm(), (p[0] - p[2]).norm()});
}

FaceJump BackgroundMesh::face_jump_pairs(int face) const {
  if (face < 0 || face >= n_faces()) {
    throw GeometryError("face id " + std::to_string(face) + " out of range");
  }
  const Face& f = topology_.faces[face];
  if (!f.interior()) {
    throw GeometryError("face " + std::to_string(face) + " is an exterior face");
  }
  return {f.cells[0], f.cells[1], f.normal};
}

std::array<int, 6> BackgroundMesh::p2_nodes(int cell) const {
  const auto& t = triangles_[cell];
  const auto& cf = topology_.cell_faces[cell];
  const int nv = n_vertices();
  return {t[0], t[1], t[2], nv + cf[0], nv + cf[1], nv + cf[2]};
}

Side BackgroundMesh::side_of(const Vec2& p) const {
  const double tol = 1e-9 * std::max(domain_.width(), domain_.height());
  if (std::abs(p.x() - domain_.lo.x()) < tol) return Side::Left;
  if (std::abs(p.x() - domain_.hi.x()) < tol) return Side::Right;
  if (std::abs(p.y() - domain_.lo.y()) < tol) return Side::Bottom;
  if (std::abs(p.y() - domain_.hi.y()) < tol) return Side::Top;
  return Side::None;
}

int BackgroundMesh::locate(const Vec2& x) const {
  const double tol = 1e-12 * std::max(domain_.width(), domain_.height());
  if (x.x() < domain_.lo.x() - tol || x.x() > domain_.hi.x() + tol ||
      x.y() < domain_.lo.y() - tol || x.y() > domain_.hi.y() + tol) {
    return -1;
  }
  const double fx = (x.x() - domain_.lo.x()) / domain_.width() * nx_;
  const double fy = (x.y() - domain_.lo.y()) / domain_.height() * ny_;
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 1);
  const int per_square = diagonal_ == Diagonal::Right ? 2 : 4;
  const int first = per_square * (j * nx_ + i);
  int best = first;
  double best_violation = std::numeric_limits<double>::infinity();
  for (int c = first; c < first + per_square; ++c) {
    const auto p = cell_vertices(c);
    double violation = 0.0;
    for (int k = 0; k < 3; ++k) {
      violation = std::min(violation, signed_area(p[(k + 1) % 3], p[(k + 2) % 3], x));
    }
    if (violation >= 0.0) return c;
    if (-violation < best_violation) {
      best_violation = -violation;
      best = c;
    }
  }
  return best;
}

} // namespace cutstefan
