#include <doctest.h>

#include "cutstefan/element.hpp"
#include "cutstefan/interface_velocity.hpp"
#include "cutstefan/manufactured.hpp"

#include <cmath>
#include <map>

using namespace cutstefan;

namespace {

struct Setup {
  MeshPtr mesh;
  LevelSetField phi;
  CutGeometry g;
  NormalField n;
  SpacePtr V;
};

Setup make(const Rect& domain, int nx, int ny, const std::function<double(const Vec2&)>& phi_fn,
           const BoundaryMap& bc = kAllNeumann) {
  auto mesh = BackgroundMesh::build_structured(domain, nx, ny);
  auto phi = LevelSetField::interpolate(mesh, phi_fn);
  CutGeometry g = build_cut_geometry(phi, {bc});
  NormalField n = project_normal(phi);
  auto V = FunctionSpace::p1_active(g);
  return {mesh, phi, std::move(g), std::move(n), V};
}

Setup flat(int n, double y0) {
  return make({{0, 0}, {1, 1}}, n, n, [y0](const Vec2& x) { return x.y() - y0; });
}

FeField nodal(const SpacePtr& V, const std::function<double(const Vec2&)>& f) {
  Eigen::VectorXd c(V->n_dofs());
  for (int d = 0; d < V->n_dofs(); ++d) c[d] = f(V->mesh()->vertex(V->dof_vertex(d)));
  return FeField(V, c);
}

ProblemSpec heat_spec(double T_m) {
  ProblemSpec s;
  s.material.T_m = T_m;
  s.T_0 = [](const Vec2&, double) { return 0.0; };
  return s;
}

} // namespace

TEST_CASE("smooth gradient reproduces affine temperatures") {
  const Setup s = flat(10, 0.537);
  const FeField T = nodal(s.V, [](const Vec2& x) { return 2.0 * x.x() - 3.0 * x.y() + 0.25; });
  const FeField G = smooth_gradient(T, s.g, 1e-3);
  const int n = s.V->n_dofs();
  REQUIRE(G.coeffs.size() == 2 * n);
  CHECK((G.coeffs.head(n).array() - 2.0).abs().maxCoeff() < 1e-10);
  CHECK((G.coeffs.tail(n).array() + 3.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("smooth gradient is insensitive to gamma_GT") {
  const Setup s = make({{-1, -1}, {1, 1}}, 24, 24, [](const Vec2& x) { return 0.63 - x.norm(); });
  const FeField T = nodal(s.V, [](const Vec2& x) { return std::sin(2 * x.x()) * std::cos(x.y()); });
  const FeField ref = smooth_gradient(T, s.g, 1e-3);
  for (double gg : {1e-4, 1e-2}) {
    const FeField G = smooth_gradient(T, s.g, gg);
    CHECK((G.coeffs - ref.coeffs).norm() <= 0.05 * ref.coeffs.norm());
  }
}

TEST_CASE("cold interface gives zero velocity") {
  const Setup s = flat(12, 0.41);
  const ProblemSpec spec = heat_spec(1.0);
  const FeField T = nodal(s.V, [](const Vec2& x) { return -1.0 + x.x(); });
  const FeField G = smooth_gradient(T, s.g, 1e-3);
  for (VelocityGate gate : {VelocityGate::Pointwise, VelocityGate::ClosestInterfacePoint}) {
    const FeField vn = normal_velocity(T, G, s.n, s.g, spec, 0.0, {gate, 4});
    CHECK(vn.coeffs.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("hot flat interface: velocity follows the flux") {
  // T - T_m > 0 on the whole interface, so every gate is open.
  const Setup s = flat(16, 0.47);
  ProblemSpec spec = heat_spec(-1.0);
  spec.material.k = 2.0;
  spec.material.rho = 0.5;
  spec.material.L = 4.0;
  const FeField T = nodal(s.V, [](const Vec2& x) { return 0.5 + 0.8 * x.y(); });
  const FeField G = smooth_gradient(T, s.g, 1e-3);
  const FeField vn = normal_velocity(T, G, s.n, s.g, spec, 0.0);
  // (k dT/dy) / (rho L) with n = (0, 1).
  CHECK((vn.coeffs.array() - 2.0 * 0.8 / 2.0).abs().maxCoeff() < 1e-10);

  // theta2 never enters the velocity.
  ProblemSpec other = spec;
  other.nitsche.theta2 = 1;
  const FeField vn2 = normal_velocity(T, G, s.n, s.g, other, 0.0);
  CHECK((vn.coeffs - vn2.coeffs).cwiseAbs().maxCoeff() == 0.0);
  CHECK((normal_velocity(T, G, s.n, s.g, spec, 0.0).coeffs - vn.coeffs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("extension of a constant is exact") {
  const Setup s = make({{-1, -1}, {1, 1}}, 20, 20, [](const Vec2& x) { return x.norm() - 0.55; });
  const FeField v = nodal(s.V, [](const Vec2&) { return -0.37; });
  std::vector<char> reached;
  bool monotone = false;
  const FeField ext = fast_march_extend(v, s.g, kExtensionBand, &reached, &monotone);
  CHECK(monotone);
  int n_reached = 0;
  for (int i = 0; i < s.mesh->n_vertices(); ++i) {
    if (!reached[i]) {
      CHECK(ext.coeffs[i] == 0.0);
      continue;
    }
    ++n_reached;
    CHECK(std::abs(ext.coeffs[i] + 0.37) < 1e-12);
  }
  CHECK(n_reached > 0);

  // Extending the extension changes nothing.
  const FeField again = fast_march_extend(
      FeField(s.V, [&] {
        Eigen::VectorXd c(s.V->n_dofs());
        for (int d = 0; d < s.V->n_dofs(); ++d) c[d] = ext.coeffs[s.V->dof_vertex(d)];
        return c;
      }()),
      s.g);
  CHECK((again.coeffs - ext.coeffs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("flat extension is constant along the normal") {
  const int n = 30;
  const Setup s = flat(n, 0.5 + 0.3 / n);
  const FeField v = nodal(s.V, [](const Vec2& x) { return std::sin(3 * x.x()); });
  std::vector<char> reached;
  const FeField ext = fast_march_extend(v, s.g, kExtensionBand, &reached);
  std::map<int, std::vector<double>> columns;
  for (int i = 0; i < s.mesh->n_vertices(); ++i) {
    if (!reached[i]) continue;
    const Vec2 x = s.mesh->vertex(i);
    columns[static_cast<int>(std::lround(x.x() * n))].push_back(ext.coeffs[i]);
  }
  const double h = 1.0 / n;
  for (const auto& [col, vals] : columns) {
    const double x = col * h;
    for (double val : vals) CHECK(std::abs(val - std::sin(3 * x)) < 2 * h * h);
  }
}

TEST_CASE("vectorize") {
  const Setup s = flat(8, 0.52);
  const auto Vb = FunctionSpace::p1_background(s.mesh);
  const FeField c(Vb, Eigen::VectorXd::Constant(Vb->n_dofs(), 1.5));
  const FeField v = vectorize(c, s.n);
  const int n = Vb->n_dofs();
  REQUIRE(v.coeffs.size() == 2 * n);
  CHECK(v.coeffs.head(n).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((v.coeffs.tail(n).array() - 1.5).abs().maxCoeff() < 1e-12);

  const FeField z(Vb, Eigen::VectorXd::Zero(n));
  CHECK(vectorize(z, s.n).coeffs.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(vectorize(FeField(s.V), s.n), AssemblyError);
}

TEST_CASE("manufactured velocity at the first step") {
  const ManufacturedCase mc;
  const double dt = 1e-4;
  const ProblemSpec spec = mc.problem(dt, 0.0, dt);
  const Setup s = make(mc.domain, 60, 60, [&](const Vec2& x) { return mc.level_set(x, 0.0); },
                       kAllDirichlet);
  const FeField T = nodal(s.V, [&](const Vec2& x) { return mc.temperature(x, dt); });
  const FeField G = smooth_gradient(T, s.g, spec.nitsche.gamma_GT);
  const FeField vn = normal_velocity(T, G, s.n, s.g, spec, dt);
  double num = 0.0, len = 0.0;
  for (const InterfaceSegment& seg : s.g.interface_segments) {
    const Vec2 m = 0.5 * (seg.a + seg.b);
    const P1Element el(s.mesh->cell_vertices(seg.parent));
    num += seg.length() * vn.value(seg.parent, el.barycentric(m));
    len += seg.length();
  }
  CHECK(num / len == doctest::Approx(ManufacturedCase::normal_speed(dt)).epsilon(0.02));
}
