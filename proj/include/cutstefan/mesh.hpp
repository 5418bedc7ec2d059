#pragma once

#include "cutstefan/types.hpp"

#include <array>
#include <memory>
#include <vector>

namespace cutstefan {

struct Rect {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{1.0, 1.0};

  double width() const { return hi.x() - lo.x(); }
  double height() const { return hi.y() - lo.y(); }
  double area() const { return width() * height(); }
};

enum class Diagonal { Right, Crossed };

/// Side of the background rectangle an exterior face lies on.
enum class Side : std::uint8_t { Left = 0, Right = 1, Bottom = 2, Top = 3, None = 4 };

struct Face {
  std::array<int, 2> vertices{};
  /// cells[0] is K+ (the lower triangle index), cells[1] is K- or -1 on the boundary.
  std::array<int, 2> cells{-1, -1};
  /// Unit normal, outward from cells[0].
  Vec2 normal = Vec2::Zero();
  Side side = Side::None;

  bool interior() const { return cells[1] >= 0; }
};

struct FaceJump {
  int plus;
  int minus;
  Vec2 normal;
};

/// Face connectivity of an arbitrary CCW triangle list.
struct Topology {
  std::vector<Face> faces;
  /// Face opposite local vertex i of each triangle.
  std::vector<std::array<int, 3>> cell_faces;
  /// Triangle across the face opposite local vertex i, or -1.
  std::vector<std::array<int, 3>> neighbors;
};

Topology build_topology(const std::vector<Vec2>& vertices,
                        const std::vector<std::array<int, 3>>& triangles);

/// Once-refined companion grid. Its vertices are the P2 nodes of the coarse
/// mesh (coarse vertices first, then face midpoints), and the children of
/// coarse cell c are triangles 4c .. 4c+3.
struct RefinedMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> parent;
  Topology topology;
};

class BackgroundMesh {
public:
  static constexpr int dim = kDim;

  static std::shared_ptr<const BackgroundMesh>
  build_structured(const Rect& domain, int nx, int ny, Diagonal diagonal = Diagonal::Right);

  const Rect& domain() const { return domain_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Face>& faces() const { return topology_.faces; }
  const std::vector<int>& interior_faces() const { return interior_faces_; }
  const std::vector<int>& exterior_faces() const { return exterior_faces_; }
  const std::array<int, 3>& cell_faces(int cell) const { return topology_.cell_faces[cell]; }
  const std::array<int, 3>& cell_neighbors(int cell) const { return topology_.neighbors[cell]; }

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_cells() const { return static_cast<int>(triangles_.size()); }
  int n_faces() const { return static_cast<int>(topology_.faces.size()); }

  Vec2 vertex(int v) const { return vertices_[v]; }
  std::array<Vec2, 3> cell_vertices(int cell) const;
  double cell_area(int cell) const;
  double cell_diameter(int cell) const;

  double h_max() const { return h_max_; }
  double h_min() const { return h_min_; }

  /// Throws GeometryError for an exterior face.
  FaceJump face_jump_pairs(int face) const;

  /// P2 node numbering: vertices, then one node per face midpoint.
  int n_p2_nodes() const { return n_vertices() + n_faces(); }
  /// Local order: v0, v1, v2, then midpoints of the faces opposite v0, v1, v2.
  std::array<int, 6> p2_nodes(int cell) const;
  Vec2 p2_node_position(int node) const { return refined_.vertices[node]; }

  const RefinedMesh& refined() const { return refined_; }

  /// Cells sharing vertex v.
  const std::vector<int>& vertex_cells(int v) const { return vertex_cells_[v]; }
  /// Vertices joined to v by an edge.
  const std::vector<int>& vertex_neighbors(int v) const { return vertex_neighbors_[v]; }

  Side side_of(const Vec2& boundary_point) const;

  /// Cell containing x (closed triangles), or -1 outside the rectangle.
  int locate(const Vec2& x) const;

private:
  BackgroundMesh() = default;
  void finalize();

  Rect domain_;
  Diagonal diagonal_ = Diagonal::Right;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  Topology topology_;
  std::vector<int> interior_faces_;
  std::vector<int> exterior_faces_;
  std::vector<std::vector<int>> vertex_cells_;
  std::vector<std::vector<int>> vertex_neighbors_;
  RefinedMesh refined_;
  double h_max_ = 0.0;
  double h_min_ = 0.0;
};

using MeshPtr = std::shared_ptr<const BackgroundMesh>;

} // namespace cutstefan
