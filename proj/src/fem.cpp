#include "cutstefan/fem.hpp"

#include "cutstefan/element.hpp"
#include "cutstefan/quadrature.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#ifdef CUTSTEFAN_HAVE_KLU
#include <Eigen/KLUSupport>
#endif

#include <algorithm>
#include <cmath>
#include <string>

namespace cutstefan {

// ---------------------------------------------------------------------------
// Spaces and fields

std::shared_ptr<const FunctionSpace> FunctionSpace::p1_active(const CutGeometry& geometry,
                                                              int components) {
  if (components < 1) throw AssemblyError("space needs at least one component");
  auto s = std::shared_ptr<FunctionSpace>(new FunctionSpace());
  const BackgroundMesh& mesh = *geometry.mesh;
  s->kind_ = SpaceKind::P1Active;
  s->components_ = components;
  s->mesh_ = geometry.mesh;
  s->cell_mask_ = geometry.active;
  s->vertex_dof_.assign(mesh.n_vertices(), -1);
  for (int c : geometry.active_cells) {
    for (int v : mesh.triangles()[c]) s->vertex_dof_[v] = 0;
  }
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (s->vertex_dof_[v] == 0) {
      s->vertex_dof_[v] = static_cast<int>(s->dof_vertex_.size());
      s->dof_vertex_.push_back(v);
    }
  }
  s->n_scalar_ = static_cast<int>(s->dof_vertex_.size());
  return s;
}

std::shared_ptr<const FunctionSpace> FunctionSpace::p1_background(MeshPtr mesh, int components) {
  if (components < 1) throw AssemblyError("space needs at least one component");
  auto s = std::shared_ptr<FunctionSpace>(new FunctionSpace());
  s->kind_ = SpaceKind::P1Background;
  s->components_ = components;
  s->n_scalar_ = mesh->n_vertices();
  s->mesh_ = std::move(mesh);
  return s;
}

std::shared_ptr<const FunctionSpace> FunctionSpace::p2_background(MeshPtr mesh) {
  auto s = std::shared_ptr<FunctionSpace>(new FunctionSpace());
  s->kind_ = SpaceKind::P2Background;
  s->n_scalar_ = mesh->n_p2_nodes();
  s->mesh_ = std::move(mesh);
  return s;
}

std::array<int, 3> FunctionSpace::p1_dofs(int cell) const {
  const auto& t = mesh_->triangles()[cell];
  return {vertex_dof(t[0]), vertex_dof(t[1]), vertex_dof(t[2])};
}

std::array<int, 6> FunctionSpace::p2_dofs(int cell) const { return mesh_->p2_nodes(cell); }

bool FunctionSpace::same_layout(const FunctionSpace& o) const {
  return kind_ == o.kind_ && components_ == o.components_ && n_scalar_ == o.n_scalar_ &&
         mesh_ == o.mesh_ && dof_vertex_ == o.dof_vertex_;
}

FeField::FeField(SpacePtr s) : space(std::move(s)), coeffs(Eigen::VectorXd::Zero(space->n_dofs())) {}

FeField::FeField(SpacePtr s, Eigen::VectorXd c) : space(std::move(s)), coeffs(std::move(c)) {
  if (coeffs.size() != space->n_dofs()) {
    throw AssemblyError("field has " + std::to_string(coeffs.size()) + " coefficients but space has " +
                        std::to_string(space->n_dofs()) + " dofs");
  }
  if (!coeffs.allFinite()) throw AssemblyError("field coefficients are not finite");
}

double FeField::value(int cell, const Vec3& bary, int component) const {
  const int off = component * space->n_scalar_dofs();
  if (space->kind() == SpaceKind::P2Background) {
    const auto d = space->p2_dofs(cell);
    const auto N = p2_values(bary);
    double v = 0.0;
    for (int i = 0; i < 6; ++i) v += N[i] * coeffs[off + d[i]];
    return v;
  }
  const auto d = space->p1_dofs(cell);
  return bary[0] * coeffs[off + d[0]] + bary[1] * coeffs[off + d[1]] + bary[2] * coeffs[off + d[2]];
}

Vec2 FeField::gradient(int cell, const Vec3& bary, int component) const {
  const int off = component * space->n_scalar_dofs();
  const P1Element el(space->mesh()->cell_vertices(cell));
  Vec2 g = Vec2::Zero();
  if (space->kind() == SpaceKind::P2Background) {
    const auto d = space->p2_dofs(cell);
    const auto G = p2_gradients(bary, el.grad);
    for (int i = 0; i < 6; ++i) g += coeffs[off + d[i]] * G[i];
    return g;
  }
  const auto d = space->p1_dofs(cell);
  for (int i = 0; i < 3; ++i) g += coeffs[off + d[i]] * el.grad[i];
  return g;
}

// ---------------------------------------------------------------------------
// Builder

SystemBuilder::SystemBuilder(int n) : n_(n), rhs_(Eigen::VectorXd::Zero(n)) {
  if (n < 0) throw AssemblyError("negative system size");
}

Eigen::SparseMatrix<double, Eigen::RowMajor> SystemBuilder::matrix() const {
  for (const auto& t : triplets_) {
    if (!std::isfinite(t.value())) {
      throw AssemblyError("non-finite matrix entry at (" + std::to_string(t.row()) + ", " +
                          std::to_string(t.col()) + ")");
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> A(n_, n_);
  A.setFromTriplets(triplets_.begin(), triplets_.end());
  return A;
}

SparseSystem SystemBuilder::build() const {
  for (int i = 0; i < n_; ++i) {
    if (!std::isfinite(rhs_[i])) {
      throw AssemblyError("non-finite right-hand side entry " + std::to_string(i));
    }
  }
  return {matrix(), rhs_};
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

void require_p1(const FunctionSpace& space) {
  if (space.kind() == SpaceKind::P2Background) {
    throw AssemblyError("this assembly routine needs a P1 space");
  }
}

void require_cell(const FunctionSpace& space, int cell) {
  if (!space.contains_cell(cell)) {
    throw AssemblyError("cell " + std::to_string(cell) + " is not covered by the function space");
  }
}

} // namespace

void assemble_bulk(const CutGeometry& geometry, const FunctionSpace& space,
                   const BulkKernel& kernel, SystemBuilder& out, int offset) {
  require_p1(space);
  if (geometry.mesh != space.mesh()) throw AssemblyError("geometry and space meshes differ");
  const auto rule = triangle_rule(2);
  const BackgroundMesh& mesh = *space.mesh();

  Eigen::Matrix3d local = Eigen::Matrix3d::Zero();
  int current = -1;
  P1Element el;
  auto flush = [&]() {
    if (current < 0) return;
    const auto d = space.p1_dofs(current);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out.add(offset + d[i], offset + d[j], local(i, j));
    local.setZero();
  };

  for (const SubTriangle& st : geometry.physical_subtris) {
    if (st.parent != current) {
      flush();
      current = st.parent;
      require_cell(space, current);
      el = P1Element(mesh.cell_vertices(current));
    }
    const double area = st.area();
    if (kernel.stiffness != 0.0) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) local(i, j) += kernel.stiffness * area * el.grad[i].dot(el.grad[j]);
    }
    if (kernel.mass != 0.0) {
      for (const auto& q : rule) {
        const Vec3 l = el.barycentric(map_point(q, st.vertices[0], st.vertices[1], st.vertices[2]));
        local += (kernel.mass * q.w * area) * (l * l.transpose());
      }
    }
  }
  flush();
}

void assemble_bulk_load(const CutGeometry& geometry, const FunctionSpace& space,
                        const std::function<double(const Vec2&)>& f, SystemBuilder& out,
                        int degree, int offset) {
  require_p1(space);
  const auto rule = triangle_rule(degree);
  const BackgroundMesh& mesh = *space.mesh();
  int current = -1;
  P1Element el;
  std::array<int, 3> d{};
  for (const SubTriangle& st : geometry.physical_subtris) {
    if (st.parent != current) {
      current = st.parent;
      require_cell(space, current);
      el = P1Element(mesh.cell_vertices(current));
      d = space.p1_dofs(current);
    }
    const double area = st.area();
    for (const auto& q : rule) {
      const Vec2 x = map_point(q, st.vertices[0], st.vertices[1], st.vertices[2]);
      const Vec3 l = el.barycentric(x);
      const double fx = f(x) * q.w * area;
      for (int i = 0; i < 3; ++i) out.add_rhs(offset + d[i], fx * l[i]);
    }
  }
}

void assemble_cell_mass(const FunctionSpace& space, double coefficient, SystemBuilder& out,
                        int offset) {
  require_p1(space);
  const BackgroundMesh& mesh = *space.mesh();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    if (!space.contains_cell(c)) continue;
    const auto d = space.p1_dofs(c);
    const double s = coefficient * mesh.cell_area(c) / 12.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out.add(offset + d[i], offset + d[j], i == j ? 2.0 * s : s);
  }
}

void for_each_interface_point(const CutGeometry& geometry, const FunctionSpace& space,
                              int n_gauss, const std::function<void(const InterfacePoint&)>& fn) {
  require_p1(space);
  const auto rule = gauss_rule(n_gauss);
  const BackgroundMesh& mesh = *space.mesh();
  for (int s = 0; s < static_cast<int>(geometry.interface_segments.size()); ++s) {
    const InterfaceSegment& seg = geometry.interface_segments[s];
    if (seg.parent < 0 || seg.parent >= mesh.n_cells() || !space.contains_cell(seg.parent)) {
      throw GeometryError("interface segment " + std::to_string(s) + " has no parent active cell");
    }
    const P1Element el(mesh.cell_vertices(seg.parent));
    InterfacePoint p;
    p.cell = seg.parent;
    p.segment = s;
    p.normal = seg.normal;
    p.dofs = space.p1_dofs(seg.parent);
    for (int i = 0; i < 3; ++i) p.dn[i] = el.grad[i].dot(seg.normal);
    const double len = seg.length();
    for (const auto& q : rule) {
      p.x = seg.a + q.s * (seg.b - seg.a);
      p.weight = q.w * len;
      const Vec3 l = el.barycentric(p.x);
      p.shape = {l[0], l[1], l[2]};
      fn(p);
    }
  }
}

void assemble_interface(const CutGeometry& geometry, const FunctionSpace& space,
                        const InterfaceKernel& kernel, SystemBuilder& out, int n_gauss) {
  for_each_interface_point(geometry, space, n_gauss, [&](const InterfacePoint& p) {
    for (int i = 0; i < 3; ++i) {
      if (kernel.linear) out.add_rhs(p.dofs[i], kernel.linear(p, i));
      if (kernel.bilinear) {
        for (int j = 0; j < 3; ++j) out.add(p.dofs[i], p.dofs[j], kernel.bilinear(p, i, j));
      }
    }
  });
}

void assemble_ghost_penalty(const CutGeometry& geometry, const FunctionSpace& space,
                            double coefficient, SystemBuilder& out, int offset) {
  require_p1(space);
  const BackgroundMesh& mesh = *space.mesh();
  for (int f : geometry.ghost_faces) {
    const Face& face = mesh.faces()[f];
    const int kp = face.cells[0];
    const int km = face.cells[1];
    require_cell(space, kp);
    require_cell(space, km);
    const P1Element ep(mesh.cell_vertices(kp));
    const P1Element em(mesh.cell_vertices(km));
    const auto& tp = mesh.triangles()[kp];
    const auto& tm = mesh.triangles()[km];

    std::array<int, 4> verts{};
    std::array<double, 4> jump{};
    int n = 0;
    auto slot = [&](int v) {
      for (int k = 0; k < n; ++k)
        if (verts[k] == v) return k;
      verts[n] = v;
      jump[n] = 0.0;
      return n++;
    };
    for (int i = 0; i < 3; ++i) jump[slot(tp[i])] += ep.grad[i].dot(face.normal);
    for (int i = 0; i < 3; ++i) jump[slot(tm[i])] -= em.grad[i].dot(face.normal);

    const double len = (mesh.vertex(face.vertices[1]) - mesh.vertex(face.vertices[0])).norm();
    const double s = coefficient * len;
    for (int a = 0; a < n; ++a) {
      const int da = offset + space.vertex_dof(verts[a]);
      for (int b = 0; b < n; ++b) {
        out.add(da, offset + space.vertex_dof(verts[b]), s * jump[a] * jump[b]);
      }
    }
  }
}

void assemble_nitsche_dirichlet(const CutGeometry& geometry, const FunctionSpace& space,
                                double k, double gamma_b,
                                const std::function<double(const Vec2&)>& T_D,
                                SystemBuilder& out) {
  require_p1(space);
  if (!(gamma_b > 0.0)) throw AssemblyError("Dirichlet penalty gamma_b must be positive");
  const BackgroundMesh& mesh = *space.mesh();
  const double pen = k * gamma_b / mesh.h_max();
  const auto rule = gauss_rule(3);
  for (const BoundaryFacet& bf : geometry.dirichlet_facets) {
    require_cell(space, bf.parent);
    const P1Element el(mesh.cell_vertices(bf.parent));
    const auto d = space.p1_dofs(bf.parent);
    std::array<double, 3> dn{};
    for (int i = 0; i < 3; ++i) dn[i] = el.grad[i].dot(bf.normal);
    const double len = bf.length();
    for (const auto& q : rule) {
      const Vec2 x = bf.a + q.s * (bf.b - bf.a);
      const Vec3 l = el.barycentric(x);
      const double w = q.w * len;
      const double g = T_D(x);
      for (int i = 0; i < 3; ++i) {
        out.add_rhs(d[i], w * (-k * dn[i] * g + pen * g * l[i]));
        for (int j = 0; j < 3; ++j) {
          out.add(d[i], d[j], w * (-k * dn[j] * l[i] - k * dn[i] * l[j] + pen * l[i] * l[j]));
        }
      }
    }
  }
}

void assemble_neumann_load(const CutGeometry& geometry, const FunctionSpace& space,
                           const std::function<double(const Vec2&)>& q_N, SystemBuilder& out) {
  require_p1(space);
  const BackgroundMesh& mesh = *space.mesh();
  const auto rule = gauss_rule(3);
  for (const BoundaryFacet& bf : geometry.neumann_facets) {
    require_cell(space, bf.parent);
    const P1Element el(mesh.cell_vertices(bf.parent));
    const auto d = space.p1_dofs(bf.parent);
    const double len = bf.length();
    for (const auto& q : rule) {
      const Vec2 x = bf.a + q.s * (bf.b - bf.a);
      const Vec3 l = el.barycentric(x);
      const double g = q_N(x) * q.w * len;
      for (int i = 0; i < 3; ++i) out.add_rhs(d[i], g * l[i]);
    }
  }
}

// ---------------------------------------------------------------------------
// Solvers

namespace {

using RowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using ColMat = Eigen::SparseMatrix<double>;

struct Residual {
  double value;
  double bound;
  bool ok() const { return std::isfinite(value) && value <= bound; }
};

Residual residual_of(const RowMat& A, const Eigen::VectorXd& b, const Eigen::VectorXd& x) {
  const double r = (A * x - b).norm();
  return {r, kSolveTolerance * (b.norm() + A.norm() * x.norm())};
}

std::string describe(const char* what, const Residual& r, int iterations) {
  return std::string(what) + " failed: residual " + std::to_string(r.value) + " vs bound " +
         std::to_string(r.bound) + " after " + std::to_string(iterations) + " iterations";
}

Eigen::VectorXd direct_solve(const RowMat& A, const Eigen::VectorXd& b, SolveReport& rep) {
  const ColMat Ac(A);
  Eigen::VectorXd x;
#ifdef CUTSTEFAN_HAVE_KLU
  Eigen::KLU<ColMat> lu;
  lu.compute(Ac);
  if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed (singular matrix?)");
  x = lu.solve(b);
  auto refine = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return lu.solve(r); };
#else
  Eigen::SparseLU<ColMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(Ac);
  if (lu.info() != Eigen::Success) {
    throw SolverError("sparse LU factorization failed: " + lu.lastErrorMessage());
  }
  x = lu.solve(b);
  auto refine = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return lu.solve(r); };
#endif
  Residual res = residual_of(A, b, x);
  int steps = 0;
  while (!res.ok() && steps < 3 && x.allFinite()) {
    x += refine(b - A * x);
    res = residual_of(A, b, x);
    ++steps;
  }
  rep.used = SolverKind::Direct;
  rep.iterations = steps;
  rep.residual = res.value;
  rep.bound = res.bound;
  if (!res.ok()) throw SolverError(describe("direct solve", res, steps));
  return x;
}

} // namespace

Eigen::VectorXd solve_sparse(const SparseSystem& system, SolverKind kind, SolveReport* report) {
  const RowMat& A = system.matrix;
  const Eigen::VectorXd& b = system.rhs;
  if (A.rows() != A.cols() || A.rows() != b.size()) {
    throw SolverError("system is not square or rhs size mismatches");
  }
  if (!b.allFinite()) throw SolverError("right-hand side is not finite");
  SolveReport local;
  SolveReport& rep = report ? *report : local;
  if (b.size() == 0) return {};

  if (kind == SolverKind::Iterative) {
    Eigen::BiCGSTAB<RowMat, Eigen::DiagonalPreconditioner<double>> it;
    it.setTolerance(1e-12);
    it.setMaxIterations(std::max<int>(200, static_cast<int>(b.size() / 10)));
    it.compute(A);
    Eigen::VectorXd x = it.solve(b);
    const Residual res = residual_of(A, b, x);
    if (res.ok()) {
      rep = {SolverKind::Iterative, static_cast<int>(it.iterations()), res.value, res.bound};
      return x;
    }
  } else if (kind == SolverKind::SymmetricPositive) {
    Eigen::ConjugateGradient<RowMat, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(std::max<int>(500, static_cast<int>(b.size() / 5)));
    cg.compute(A);
    Eigen::VectorXd x = cg.solve(b);
    const Residual res = residual_of(A, b, x);
    if (res.ok()) {
      rep = {SolverKind::SymmetricPositive, static_cast<int>(cg.iterations()), res.value, res.bound};
      return x;
    }
  }
  return direct_solve(A, b, rep);
}

struct SpdSolver::Impl {
  Eigen::SimplicialLDLT<ColMat> ldlt;
  RowMat A;
};

SpdSolver::SpdSolver(const RowMat& matrix) : impl_(std::make_unique<Impl>()) {
  impl_->A = matrix;
  impl_->ldlt.compute(ColMat(matrix));
  if (impl_->ldlt.info() != Eigen::Success) {
    throw AssemblyError("mass matrix factorization failed (singular or indefinite matrix)");
  }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = impl_->ldlt.solve(rhs);
  Residual res = residual_of(impl_->A, rhs, x);
  for (int k = 0; k < 2 && !res.ok(); ++k) {
    x += impl_->ldlt.solve(rhs - impl_->A * x);
    res = residual_of(impl_->A, rhs, x);
  }
  if (!res.ok()) throw SolverError(describe("Cholesky solve", res, 2));
  return x;
}

int SpdSolver::size() const { return static_cast<int>(impl_->A.rows()); }

} // namespace cutstefan
