#pragma once

#include "cutstefan/mesh.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <vector>

namespace cutstefan {

/// Continuous piecewise-quadratic level set on the background mesh.
/// Negative inside the material, positive in the fictitious phase.
class LevelSetField {
public:
  LevelSetField(MeshPtr mesh, Eigen::VectorXd coefficients);

  static LevelSetField interpolate(MeshPtr mesh, const std::function<double(const Vec2&)>& phi);

  const MeshPtr& mesh() const { return mesh_; }
  const Eigen::VectorXd& coefficients() const { return coeffs_; }
  Eigen::VectorXd& coefficients() { return coeffs_; }

  double value(int cell, const Vec3& bary) const;
  Vec2 gradient(int cell, const Vec3& bary) const;
  /// Value at an arbitrary point; NaN outside the domain.
  double value_at(const Vec2& x) const;

private:
  MeshPtr mesh_;
  Eigen::VectorXd coeffs_;
};

/// Nodal values of the linear interpolant on the refined mesh.
Eigen::VectorXd interpolate_to_refined_linear(const LevelSetField& phi);

enum class CellLocation : std::uint8_t { Outside, Inside, Cut };
enum class BoundaryKind : std::uint8_t { Neumann, Dirichlet };

/// Boundary condition per rectangle side, indexed by Side.
using BoundaryMap = std::array<BoundaryKind, 4>;

inline constexpr BoundaryMap kAllNeumann{BoundaryKind::Neumann, BoundaryKind::Neumann,
                                         BoundaryKind::Neumann, BoundaryKind::Neumann};
inline constexpr BoundaryMap kAllDirichlet{BoundaryKind::Dirichlet, BoundaryKind::Dirichlet,
                                           BoundaryKind::Dirichlet, BoundaryKind::Dirichlet};

struct SubTriangle {
  int parent;
  std::array<Vec2, 3> vertices;
  double area() const { return signed_area(vertices[0], vertices[1], vertices[2]); }
};

struct InterfaceSegment {
  int parent;
  Vec2 a;
  Vec2 b;
  /// Unit normal pointing from the material into the fictitious phase.
  Vec2 normal;
  double length() const { return (b - a).norm(); }
};

struct BoundaryFacet {
  int parent;
  Vec2 a;
  Vec2 b;
  Vec2 normal;
  Side side;
  double length() const { return (b - a).norm(); }
};

struct CutGeometry {
  MeshPtr mesh;
  std::vector<CellLocation> location;
  std::vector<int> active_cells;
  std::vector<int> cut_cells;
  std::vector<int> inside_cells;
  /// Sorted by parent cell.
  std::vector<SubTriangle> physical_subtris;
  std::vector<InterfaceSegment> interface_segments;
  std::vector<int> ghost_faces;
  std::vector<BoundaryFacet> dirichlet_facets;
  std::vector<BoundaryFacet> neumann_facets;
  /// Active flag per background cell.
  std::vector<char> active;

  bool is_active(int cell) const { return active[cell] != 0; }
  double physical_area() const;
  double interface_length() const;
};

struct CutOptions {
  BoundaryMap boundary = kAllNeumann;
  /// Refined nodes with |phi| < snap_factor * h_max are placed on the interface.
  double snap_factor = 1e-10;
};

/// Two-grid cut: interpolate to the refined grid, cut each child by the
/// linear interpolant and aggregate per parent cell. Throws GeometryError
/// when no material is left.
CutGeometry build_cut_geometry(const LevelSetField& phi, const CutOptions& options = {});

/// Largest number of interior faces crossed walking from a cut cell to the
/// nearest uncut active cell (assumption G3); -1 if some cut cell cannot reach one.
int g3_walk_length(const CutGeometry& geometry);

/// Per-P1-node vector field on the background mesh (components blocked).
struct NormalField {
  MeshPtr mesh;
  Eigen::VectorXd nx;
  Eigen::VectorXd ny;

  Vec2 at_vertex(int v) const { return {nx[v], ny[v]}; }
  Vec2 value(int cell, const Vec3& bary) const;
};

inline constexpr double kGradientFloor = 1e-12;

/// L2 projection of grad(phi)/|grad(phi)| onto continuous P1 over the whole
/// background domain. The result is not renormalized.
NormalField project_normal(const LevelSetField& phi);

/// project_normal with the background mass factorization kept between calls.
class NormalProjector {
public:
  explicit NormalProjector(MeshPtr mesh);
  ~NormalProjector();
  NormalProjector(NormalProjector&&) noexcept;
  NormalProjector& operator=(NormalProjector&&) noexcept;

  NormalField project(const LevelSetField& phi) const;
  const MeshPtr& mesh() const { return mesh_; }

private:
  struct Impl;
  MeshPtr mesh_;
  std::unique_ptr<Impl> impl_;
};

/// Fast-marching redistancing of the refined linear interpolant.
LevelSetField redistance(const LevelSetField& phi, const CutOptions& options = {});

/// max over cut-band cells of ||grad phi| - 1| measured at cell midpoints.
double distance_defect(const LevelSetField& phi, const CutGeometry& geometry);

inline constexpr double kRedistanceThreshold = 0.5;

bool needs_redistance(const LevelSetField& phi, const CutGeometry& geometry);

} // namespace cutstefan
