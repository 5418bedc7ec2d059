#pragma once

#include "cutstefan/levelset.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <vector>

namespace cutstefan {

enum class SpaceKind { P1Active, P1Background, P2Background };

/// Lagrange space on the background mesh or on the active part of it.
/// Vector spaces store components blocked: dof = component * n_scalar + scalar dof.
class FunctionSpace {
public:
  static std::shared_ptr<const FunctionSpace> p1_active(const CutGeometry& geometry,
                                                        int components = 1);
  static std::shared_ptr<const FunctionSpace> p1_background(MeshPtr mesh, int components = 1);
  static std::shared_ptr<const FunctionSpace> p2_background(MeshPtr mesh);

  SpaceKind kind() const { return kind_; }
  int components() const { return components_; }
  int n_scalar_dofs() const { return n_scalar_; }
  int n_dofs() const { return components_ * n_scalar_; }
  const MeshPtr& mesh() const { return mesh_; }

  bool contains_cell(int cell) const { return cell_mask_.empty() || cell_mask_[cell] != 0; }
  /// Scalar P1 dofs of a cell (P1 kinds only).
  std::array<int, 3> p1_dofs(int cell) const;
  /// Scalar P2 dofs of a cell (P2 kind only).
  std::array<int, 6> p2_dofs(int cell) const;

  /// Scalar dof sitting on background vertex v, or -1 (P1 kinds only).
  int vertex_dof(int v) const { return vertex_dof_.empty() ? v : vertex_dof_[v]; }
  int dof_vertex(int d) const { return dof_vertex_.empty() ? d : dof_vertex_[d]; }

  bool same_layout(const FunctionSpace& other) const;

private:
  FunctionSpace() = default;

  SpaceKind kind_ = SpaceKind::P1Background;
  int components_ = 1;
  int n_scalar_ = 0;
  MeshPtr mesh_;
  std::vector<char> cell_mask_;
  std::vector<int> vertex_dof_;
  std::vector<int> dof_vertex_;
};

using SpacePtr = std::shared_ptr<const FunctionSpace>;

/// Coefficient vector over a function space.
struct FeField {
  SpacePtr space;
  Eigen::VectorXd coeffs;

  FeField() = default;
  explicit FeField(SpacePtr s);
  FeField(SpacePtr s, Eigen::VectorXd c);

  /// Value at barycentric point of a cell covered by the space.
  double value(int cell, const Vec3& bary, int component = 0) const;
  Vec2 gradient(int cell, const Vec3& bary, int component = 0) const;
};

struct SparseSystem {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  Eigen::VectorXd rhs;
};

/// Collects matrix and rhs contributions as triplets in insertion order.
class SystemBuilder {
public:
  explicit SystemBuilder(int n);

  int size() const { return n_; }
  void add(int i, int j, double v) { triplets_.emplace_back(i, j, v); }
  void add_rhs(int i, double v) { rhs_[i] += v; }
  Eigen::VectorXd& rhs() { return rhs_; }

  /// Throws AssemblyError on NaN/Inf entries.
  SparseSystem build() const;
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix() const;

private:
  int n_;
  std::vector<Eigen::Triplet<double>> triplets_;
  Eigen::VectorXd rhs_;
};

struct BulkKernel {
  double mass = 0.0;
  double stiffness = 0.0;
};

/// Mass and stiffness over the physical sub-triangulation.
void assemble_bulk(const CutGeometry& geometry, const FunctionSpace& space,
                   const BulkKernel& kernel, SystemBuilder& out, int offset = 0);

/// (f, v) over the physical sub-triangulation.
void assemble_bulk_load(const CutGeometry& geometry, const FunctionSpace& space,
                        const std::function<double(const Vec2&)>& f, SystemBuilder& out,
                        int degree = 4, int offset = 0);

/// Mass matrix over whole cells covered by the space (Omega* or Omega_b).
void assemble_cell_mass(const FunctionSpace& space, double coefficient, SystemBuilder& out,
                        int offset = 0);

/// Trace data of the parent-cell P1 basis at one interface quadrature point.
struct InterfacePoint {
  int cell;
  int segment;
  Vec2 x;
  Vec2 normal;
  double weight;
  std::array<int, 3> dofs;
  std::array<double, 3> shape;
  /// grad(shape_i) . normal
  std::array<double, 3> dn;
};

void for_each_interface_point(const CutGeometry& geometry, const FunctionSpace& space,
                              int n_gauss, const std::function<void(const InterfacePoint&)>& fn);

struct InterfaceKernel {
  /// Matrix entry (test i, trial j); may be empty.
  std::function<double(const InterfacePoint&, int i, int j)> bilinear;
  /// Rhs entry for test i; may be empty.
  std::function<double(const InterfacePoint&, int i)> linear;
};

void assemble_interface(const CutGeometry& geometry, const FunctionSpace& space,
                        const InterfaceKernel& kernel, SystemBuilder& out, int n_gauss = 3);

/// coefficient * sum_F |F| [grad u . n_F][grad v . n_F] over the ghost faces.
void assemble_ghost_penalty(const CutGeometry& geometry, const FunctionSpace& space,
                            double coefficient, SystemBuilder& out, int offset = 0);

/// Symmetric Nitsche terms for T = T_D on the Dirichlet facets, h = h_max.
void assemble_nitsche_dirichlet(const CutGeometry& geometry, const FunctionSpace& space,
                                double k, double gamma_b,
                                const std::function<double(const Vec2&)>& T_D,
                                SystemBuilder& out);

/// (q_N, v) over the Neumann facets.
void assemble_neumann_load(const CutGeometry& geometry, const FunctionSpace& space,
                           const std::function<double(const Vec2&)>& q_N, SystemBuilder& out);

enum class SolverKind { Direct, Iterative, SymmetricPositive };

struct SolveReport {
  SolverKind used = SolverKind::Direct;
  int iterations = 0;
  double residual = 0.0;
  double bound = 0.0;
};

/// Residual contract: ||Ax - b|| <= 1e-10 (||b|| + ||A||_F ||x||). Iterative
/// and Cholesky attempts fall back to sparse LU when they miss it.
Eigen::VectorXd solve_sparse(const SparseSystem& system, SolverKind kind = SolverKind::Direct,
                             SolveReport* report = nullptr);

inline constexpr double kSolveTolerance = 1e-10;

/// Factorization of a fixed SPD matrix, reused across right-hand sides.
class SpdSolver {
public:
  explicit SpdSolver(const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix);
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  int size() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace cutstefan
