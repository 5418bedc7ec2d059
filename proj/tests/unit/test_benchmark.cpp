#include <doctest.h>

#include "cutstefan/benchmark.hpp"
#include "cutstefan/log.hpp"

#include <cmath>
#include <sstream>

using namespace cutstefan;

namespace {

FeField nodal(const SpacePtr& V, const std::function<double(const Vec2&)>& f) {
  Eigen::VectorXd c(V->n_dofs());
  for (int d = 0; d < V->n_dofs(); ++d) c[d] = f(V->mesh()->vertex(V->dof_vertex(d)));
  return FeField(V, c);
}

struct Hole {
  MeshPtr mesh;
  CutGeometry g;
  SpacePtr V;
};

Hole hole(int n, double R) {
  auto mesh = BackgroundMesh::build_structured({{-1, -1}, {1, 1}}, n, n);
  auto phi = LevelSetField::interpolate(mesh, [R](const Vec2& x) { return R - x.norm(); });
  CutGeometry g = build_cut_geometry(phi);
  auto V = FunctionSpace::p1_active(g);
  return {mesh, std::move(g), V};
}

} // namespace

TEST_CASE("error norms of affine and perturbed fields") {
  const Hole s = hole(16, 0.45);
  auto f = [](const Vec2& x) { return 1.0 + 0.5 * x.x() - 0.25 * x.y(); };
  auto gf = [](const Vec2&) { return Vec2(0.5, -0.25); };
  const FieldErrors e = error_norms(nodal(s.V, f), f, gf, s.g);
  CHECK(e.l2.value < 1e-13);
  CHECK(e.h1.value < 1e-13);
  CHECK(e.gamma_l2.value < 1e-13);
  CHECK(e.l2.relative);

  const double c = 0.01;
  const FieldErrors p = error_norms(nodal(s.V, [&](const Vec2& x) { return f(x) + c; }), f, gf, s.g);
  const double area = s.g.physical_area();
  double ff = 0.0;
  for (const SubTriangle& st : s.g.physical_subtris) {
    // Exact integral of an affine function squared.
    const Vec2 m = (st.vertices[0] + st.vertices[1] + st.vertices[2]) / 3.0;
    double var = 0.0;
    for (const Vec2& v : st.vertices) var += (f(v) - f(m)) * (f(v) - f(m));
    ff += st.area() * (f(m) * f(m) + var / 12.0);
  }
  CHECK(p.l2.value == doctest::Approx(c * std::sqrt(area / ff)).epsilon(1e-10));
}

TEST_CASE("error norms are scale invariant") {
  const Hole s = hole(12, 0.5);
  auto f = [](const Vec2& x) { return std::sin(x.x()) + x.y() * x.y(); };
  auto gf = [](const Vec2& x) { return Vec2(std::cos(x.x()), 2 * x.y()); };
  const FeField u = nodal(s.V, f);
  const FieldErrors a = error_norms(u, f, gf, s.g);
  const FeField u10(s.V, 10.0 * u.coeffs);
  const FieldErrors b = error_norms(u10, [&](const Vec2& x) { return 10 * f(x); },
                                    [&](const Vec2& x) { return Vec2(10 * gf(x)); }, s.g);
  CHECK(std::abs(a.l2.value - b.l2.value) < 1e-13);
  CHECK(std::abs(a.h1.value - b.h1.value) < 1e-13);
  CHECK(std::abs(a.gamma_l2.value - b.gamma_l2.value) < 1e-13);
  CHECK(a.l2.value > 0.0);

  const FieldErrors z = error_norms(u, [](const Vec2&) { return 0.0; }, [](const Vec2&) { return Vec2(0, 0); }, s.g);
  CHECK_FALSE(z.l2.relative);
  CHECK_FALSE(z.gamma_l2.relative);
}

TEST_CASE("interface averages") {
  const Hole s = hole(40, 0.5);
  const FeField c = nodal(s.V, [](const Vec2&) { return -1.25; });
  const InterfaceAverages a = interface_averages(s.g, c);
  CHECK(a.v_avg == doctest::Approx(-1.25).epsilon(1e-14));
  const double h = 2.0 / 40;
  CHECK(std::abs(a.r_avg - 0.5) < h * h);
  CHECK(a.length == doctest::Approx(s.g.interface_length()).epsilon(1e-13));

  CutGeometry empty = s.g;
  empty.interface_segments.clear();
  CHECK_THROWS_AS(interface_averages(empty, c), GeometryError);
}

TEST_CASE("order fit and time aggregation") {
  CHECK(fit_order({0.1, 0.05, 0.025}, {0.02, 0.005, 0.00125}) == doctest::Approx(2.0).epsilon(1e-12));
  // Only the last three points count.
  CHECK(fit_order({1.0, 0.1, 0.05, 0.025}, {5.0, 0.02, 0.005, 0.00125}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::isnan(fit_order({0.1}, {0.2})));
  CHECK(std::isnan(fit_order({0.1, 0.05}, {0.0, 0.1})));
  CHECK(l2_in_time({3.0, 4.0}) == doctest::Approx(std::sqrt(12.5)));
  CHECK(l2_in_time({}) == 0.0);
}

TEST_CASE("manufactured run: one step moves the hole by alpha dt") {
  set_log_sink({});
  ManufacturedRunOptions o;
  o.cells = 120;
  o.dt = 1e-4;
  o.tf = 1e-4;
  const ManufacturedRun run = run_manufactured(o);
  reset_log_sink();
  REQUIRE_FALSE(run.failed);
  REQUIRE(run.records.size() == 1);
  REQUIRE(run.final_state);
  const CutGeometry g = build_cut_geometry(run.final_state->phi, {kAllDirichlet});
  const auto V = FunctionSpace::p1_active(g);
  const double r1 = interface_averages(g, FeField(V)).r_avg;
  const double dr = r1 - run.report.steps[0].r_avg;
  CHECK(dr == doctest::Approx(ManufacturedCase::alpha(0.0) * o.dt).epsilon(0.2));
  CHECK(run.report.steps[0].v_avg == doctest::Approx(-1.5).epsilon(0.02));
  CHECK(run.report.final_T.l2.value < 1e-3);
  CHECK(run.h == doctest::Approx(1.0 / 40));
}

TEST_CASE("convergence table csv") {
  set_log_sink({});
  std::vector<ManufacturedRunOptions> cfg(2);
  cfg[0].cells = 24;
  cfg[1].cells = 36;
  for (auto& c : cfg) {
    c.dt = 1e-3;
    c.tf = 2e-3;
  }
  const ConvergenceTable t = convergence_study(cfg, StudyAxis::Space);
  reset_log_sink();
  REQUIRE(t.runs.size() == 2);
  CHECK(std::isfinite(t.order("T_L2")));
  CHECK_THROWS_AS(t.order("nope"), ConfigError);
  std::ostringstream os;
  t.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  int lines = 0;
  std::size_t commas = 0;
  while (std::getline(is, line)) {
    const std::size_t c = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    if (lines == 0) commas = c;
    CHECK(c == commas);
    ++lines;
  }
  CHECK(lines == 4);
  CHECK(os.str().rfind("h,dt,T_L2", 0) == 0);
}

TEST_CASE("flat cut condition numbers") {
  FlatCutOptions o;
  o.cells = 16;
  const double c0 = flat_cut_condition_number(0.25, o);
  CHECK(c0 > 1.0);
  CHECK(std::isfinite(c0));
  CHECK(condition_spread({0.0, 0.1, 0.25, 0.49}, o) < 10.0);
  o.gamma_ghost = 0.0;
  CHECK(flat_cut_condition_number(0.1, o) > 10.0 * c0);
  o.cells = 15;
  CHECK_THROWS_AS(flat_cut_condition_number(0.1, o), ConfigError);
}

TEST_CASE("final difference of manufactured states") {
  set_log_sink({});
  ManufacturedRunOptions o;
  o.cells = 30;
  o.dt = 1e-3;
  o.tf = 0.003;
  const ManufacturedRun a = run_manufactured(o);
  o.nitsche.theta1 = 1.0;
  o.nitsche.theta2 = 1.0;
  const ManufacturedRun b = run_manufactured(o);
  reset_log_sink();
  REQUIRE(a.final_state);
  REQUIRE(b.final_state);
  CHECK(final_difference(*a.final_state, *a.final_state) == 0.0);
  const double d = final_difference(*a.final_state, *b.final_state);
  CHECK(d > 0.0);
  CHECK(d < 0.05);
  const ConvergenceTable t = tabulate({a, b}, StudyAxis::Time);
  CHECK(t.runs.size() == 2);
  CHECK(std::isnan(t.order("T_L2")));
}
