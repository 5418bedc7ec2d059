#include <doctest.h>

#include "cutstefan/fem.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace cutstefan;

namespace {

MeshPtr square(int n) { return BackgroundMesh::build_structured({{0, 0}, {1, 1}}, n, n); }

CutGeometry plane_geometry(const MeshPtr& mesh, double y0, const BoundaryMap& bc = kAllNeumann) {
  const auto phi = LevelSetField::interpolate(mesh, [&](const Vec2& x) { return x.y() - y0; });
  return build_cut_geometry(phi, {bc});
}

Eigen::MatrixXd dense(const SystemBuilder& b) { return Eigen::MatrixXd(b.matrix()); }

} // namespace

TEST_CASE("bulk stiffness and mass") {
  const auto mesh = square(6);
  const CutGeometry g = plane_geometry(mesh, 2.0);
  const auto V = FunctionSpace::p1_active(g);
  SystemBuilder k(V->n_dofs());
  assemble_bulk(g, *V, {0.0, 1.0}, k);
  const Eigen::MatrixXd K = dense(k);
  CHECK(K.rowwise().sum().cwiseAbs().maxCoeff() < 1e-13);

  const double dt = 0.005, c0 = 0.7;
  SystemBuilder m(V->n_dofs());
  assemble_bulk(g, *V, {1.0 / dt, 0.0}, m);
  const Eigen::VectorXd T = Eigen::VectorXd::Constant(V->n_dofs(), c0);
  CHECK((dense(m) * T).sum() == doctest::Approx(c0 * 1.0 / dt).epsilon(1e-12));
}

TEST_CASE("half-cut mass matches conforming mesh") {
  const auto mesh = square(8);
  const CutGeometry g = plane_geometry(mesh, 0.5);
  const auto V = FunctionSpace::p1_active(g);
  SystemBuilder m(V->n_dofs());
  assemble_bulk(g, *V, {1.0 / 0.005, 0.0}, m);
  CHECK(dense(m).sum() == doctest::Approx(0.5 / 0.005).epsilon(1e-12));

  // Conforming oracle: mesh of (0,1)x(0,0.5) with the same cells.
  const auto half = BackgroundMesh::build_structured({{0, 0}, {1, 0.5}}, 8, 4);
  const auto Vh = FunctionSpace::p1_background(half);
  SystemBuilder mh(Vh->n_dofs());
  assemble_cell_mass(*Vh, 1.0 / 0.005, mh);
  CHECK(dense(mh).sum() == doctest::Approx(dense(m).sum()).epsilon(1e-12));
}

TEST_CASE("ghost penalty") {
  const auto mesh = square(6);
  const CutGeometry g = plane_geometry(mesh, 0.43);
  REQUIRE(!g.ghost_faces.empty());
  const auto V = FunctionSpace::p1_active(g);
  SystemBuilder s(V->n_dofs());
  assemble_ghost_penalty(g, *V, 0.1, s);
  const Eigen::MatrixXd S = dense(s);
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::VectorXd affine(V->n_dofs());
  for (int d = 0; d < V->n_dofs(); ++d) {
    const Vec2 x = mesh->vertex(V->dof_vertex(d));
    affine[d] = 1.3 - 2.0 * x.x() + 0.4 * x.y();
  }
  CHECK((S * affine).cwiseAbs().maxCoeff() < 1e-13);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);

  // Two-triangle patch, single diagonal face: hand formula.
  const auto two = BackgroundMesh::build_structured({{0, 0}, {1, 1}}, 1, 1);
  CutGeometry gg;
  gg.mesh = two;
  gg.active = {1, 1};
  gg.active_cells = {0, 1};
  gg.location = {CellLocation::Cut, CellLocation::Inside};
  gg.ghost_faces = {two->interior_faces()[0]};
  const auto V2 = FunctionSpace::p1_active(gg);
  SystemBuilder s2(V2->n_dofs());
  assemble_ghost_penalty(gg, *V2, 0.5, s2);
  // Hat at vertex 1 = (1,0): gradient (1,-1)... only in the lower triangle (0,1,2).
  const Eigen::MatrixXd S2 = dense(s2);
  const FaceJump fj = two->face_jump_pairs(two->interior_faces()[0]);
  const Vec2 grad_lower(0.0, -1.0);  // hat at (1,0) in triangle (0,0),(1,0),(1,1) is 1 - y... times
  (void)grad_lower;
  // hat of vertex 1 restricted to cell 0 (vertices (0,0),(1,0),(1,1)) is x - y.
  const double jump = Vec2(1.0, -1.0).dot(fj.normal);
  CHECK(S2(1, 1) == doctest::Approx(0.5 * std::sqrt(2.0) * jump * jump).epsilon(1e-14));
}

TEST_CASE("Nitsche Dirichlet reproduces affine solutions") {
  const auto mesh = square(5);
  const CutGeometry g = plane_geometry(mesh, 0.77, kAllDirichlet);
  const auto V = FunctionSpace::p1_active(g);
  auto exact = [](const Vec2& x) { return 0.3 + 1.7 * x.x() - 0.6 * x.y(); };
  // Neumann flux on the interface: k grad u . n with n = (0,1).
  std::vector<Eigen::VectorXd> sols;
  for (double gb : {10.0, 100.0, 1000.0}) {
    SystemBuilder b(V->n_dofs());
    assemble_bulk(g, *V, {0.0, 1.0}, b);
    assemble_ghost_penalty(g, *V, 0.1 * mesh->h_max(), b);
    assemble_nitsche_dirichlet(g, *V, 1.0, gb, exact, b);
    assemble_interface(g, *V, {{}, [](const InterfacePoint& p, int i) { return p.weight * p.shape[i] * (-0.6); }}, b);
    const Eigen::VectorXd x = solve_sparse(b.build());
    for (int d = 0; d < V->n_dofs(); ++d) CHECK(std::abs(x[d] - exact(mesh->vertex(V->dof_vertex(d)))) < 1e-10);
    sols.push_back(x);
  }
  CHECK((sols[0] - sols[2]).cwiseAbs().maxCoeff() < 1e-10);

  SystemBuilder zero(V->n_dofs());
  assemble_nitsche_dirichlet(g, *V, 1.0, 100.0, [](const Vec2&) { return 0.0; }, zero);
  CHECK(zero.rhs().cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(assemble_nitsche_dirichlet(g, *V, 1.0, 0.0, exact, zero), AssemblyError);
}

TEST_CASE("interface line load") {
  const auto mesh = BackgroundMesh::build_structured({{0, 0}, {3, 1.2}}, 30, 12);
  const auto phi = LevelSetField::interpolate(mesh, [](const Vec2& x) { return x.y() - 1.0 + 1e-3; });
  const CutGeometry g = build_cut_geometry(phi);
  const auto V = FunctionSpace::p1_active(g);
  const double A = 0.8, f = 2.5;
  SystemBuilder b(V->n_dofs());
  assemble_interface(g, *V, {{}, [&](const InterfacePoint& p, int i) {
                               const Vec2 I(0.0, -A * f);
                               return p.weight * p.shape[i] * (-I.dot(Vec2(0, -1)));
                             }}, b);
  CHECK(b.rhs().sum() == doctest::Approx(-A * f * 3.0).epsilon(1e-12));
}

TEST_CASE("Nitsche variants differ by the skew block") {
  const auto mesh = square(6);
  const CutGeometry g = plane_geometry(mesh, 0.61);
  const auto V = FunctionSpace::p1_active(g);
  const double gamma = 0.3, k = 1.0;
  auto block = [&](double th1, double th2) {
    SystemBuilder b(V->n_dofs());
    assemble_interface(g, *V, {[&](const InterfacePoint& p, int i, int j) {
                                 const double pd = th1 * p.shape[i] - gamma * th2 * k * p.dn[i];
                                 return p.weight * k * p.dn[j] * (pd - p.shape[i]);
                               }, {}}, b);
    return dense(b);
  };
  const Eigen::MatrixXd a = block(1, 1), c = block(1, -1);
  SystemBuilder nn(V->n_dofs());
  assemble_interface(g, *V, {[&](const InterfacePoint& p, int i, int j) {
                               return p.weight * k * p.dn[j] * k * p.dn[i];
                             }, {}}, nn);
  CHECK(((c - a) - 2 * gamma * dense(nn)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("solve_sparse") {
  SparseSystem id;
  id.matrix.resize(3, 3);
  id.matrix.setIdentity();
  id.rhs = Eigen::Vector3d(1, 2, 3);
  CHECK((solve_sparse(id) - id.rhs).norm() == 0.0);

  SparseSystem ns;
  ns.matrix.resize(2, 2);
  ns.matrix.insert(0, 0) = 2;
  ns.matrix.insert(0, 1) = 1;
  ns.matrix.insert(1, 1) = 1;
  ns.rhs = Eigen::Vector2d(3, 1);
  for (SolverKind k : {SolverKind::Direct, SolverKind::Iterative}) {
    const Eigen::VectorXd x = solve_sparse(ns, k);
    CHECK(std::abs(x[0] - 1) < 1e-12);
    CHECK(std::abs(x[1] - 1) < 1e-12);
  }

  const auto mesh = square(12);
  const auto V = FunctionSpace::p1_background(mesh);
  SystemBuilder b(V->n_dofs());
  assemble_cell_mass(*V, 1.0, b);
  CutGeometry full = plane_geometry(mesh, 2.0);
  assemble_bulk(full, *V, {0.0, 1.0}, b);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int i = 0; i < V->n_dofs(); ++i) b.add_rhs(i, U(rng));
  const SparseSystem sys = b.build();
  const Eigen::VectorXd oracle = Eigen::MatrixXd(sys.matrix).lu().solve(sys.rhs);
  for (SolverKind k : {SolverKind::Direct, SolverKind::Iterative, SolverKind::SymmetricPositive}) {
    SolveReport rep;
    const Eigen::VectorXd x = solve_sparse(sys, k, &rep);
    CHECK((x - oracle).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(rep.residual <= rep.bound);
  }

  SparseSystem singular;
  singular.matrix.resize(2, 2);
  singular.matrix.insert(0, 0) = 1;
  singular.rhs = Eigen::Vector2d(1, 1);
  CHECK_THROWS_AS(solve_sparse(singular), SolverError);
}

TEST_CASE("field size checks") {
  const auto mesh = square(3);
  const auto V = FunctionSpace::p1_background(mesh);
  CHECK_THROWS_AS(FeField(V, Eigen::VectorXd::Zero(3)), AssemblyError);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(V->n_dofs());
  bad[0] = NAN;
  CHECK_THROWS_AS(FeField(V, bad), AssemblyError);
}
