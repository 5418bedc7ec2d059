#include <doctest.h>

#include "cutstefan/app.hpp"
#include "cutstefan/log.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cutstefan;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("cutstefan_test_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

/// Points and triangles of a legacy VTK unstructured grid.
struct VtkGrid {
  std::vector<Vec2> points;
  std::vector<std::vector<int>> cells;
};

VtkGrid read_vtk(const std::string& path) {
  std::ifstream in(path);
  VtkGrid g;
  std::string word;
  while (in >> word) {
    if (word == "POINTS") {
      std::size_t n;
      std::string type;
      in >> n >> type;
      for (std::size_t i = 0; i < n; ++i) {
        double x, y, z;
        in >> x >> y >> z;
        g.points.emplace_back(x, y);
      }
    } else if (word == "CELLS") {
      std::size_t n, total;
      in >> n >> total;
      for (std::size_t i = 0; i < n; ++i) {
        int k;
        in >> k;
        std::vector<int> c(k);
        for (int& v : c) in >> v;
        g.cells.push_back(c);
      }
    }
  }
  return g;
}

RunConfig small_ablation(const std::string& dir) {
  RunConfig c = pulsed_ablation_config(0.1);
  c.nx = 30;
  c.ny = 12;
  c.dt = 1e-3;
  c.tf = 0.02;
  c.beam->path.tf = c.tf;
  c.output.dir = dir;
  c.output.every = 10;
  return c;
}

} // namespace

TEST_CASE("expressions") {
  const Vec2 x(0.25, 1.5);
  CHECK(Expression("y - 1 - 0.1*sin(2*pi*x)")(x) == doctest::Approx(0.5 - 0.1));
  CHECK(Expression("-2^2")(x) == -4.0);
  CHECK(Expression("2^-1")(x) == 0.5);
  CHECK(Expression("max(x, y) + min(abs(-3), sqrt(16))")(x) == 4.5);
  CHECK(Expression(" (x+y)*(x-y) / 2 ")(x) == doctest::Approx((0.25 * 0.25 - 2.25) / 2));
  CHECK(Expression("t*exp(0)")(x, 3.0) == 3.0);
  CHECK_THROWS_WITH_AS(Expression("x + foo(y)"), doctest::Contains("column 5"), ConfigError);
  CHECK_THROWS_AS(Expression("(x + y"), ConfigError);
  CHECK_THROWS_AS(Expression("x y"), ConfigError);
  CHECK_THROWS_AS(Expression("max(x)"), ConfigError);
  CHECK_THROWS_AS(Expression(""), ConfigError);
}

TEST_CASE("config round trip and presets") {
  const RunConfig p = pulsed_ablation_config(0.01);
  CHECK(p.problems().empty());
  const RunConfig q = parse_config(dump_config(p));
  CHECK(dump_config(q) == dump_config(p));
  REQUIRE(q.beam);
  CHECK(q.beam->P0 == 0.01);
  CHECK(q.beam->path.kind == PathKind::Raster);
  CHECK(q.nx == 63);
  CHECK(q.ny == 25);
  CHECK(q.boundary[static_cast<int>(Side::Bottom)] == BoundaryKind::Dirichlet);
  CHECK(q.output.profile->first == doctest::Approx(0.7));
  CHECK(q.output.profile->second == doctest::Approx(2.3));

  const RunConfig m = parse_config("scenario: manufactured\nmesh: {cells: 40}\ntime: {dt: 1.0e-4, tf: 0.01}\n");
  CHECK(m.scenario == Scenario::Manufactured);
  CHECK(m.nx == 40);
  CHECK(m.domain.lo.x() == -1.5);
  CHECK(m.material.T_m == -0.01);
}

TEST_CASE("shipped presets match the built-in configurations") {
  const std::string dir = std::string(CUTSTEFAN_SOURCE_DIR) + "/presets/";
  CHECK(dump_config(load_config(dir + "pulsed_P0_0.1.yaml")) == dump_config(pulsed_ablation_config(0.1)));
  CHECK(dump_config(load_config(dir + "pulsed_P0_0.01.yaml")) == dump_config(pulsed_ablation_config(0.01)));
  CHECK(dump_config(load_config(dir + "manufactured.yaml")) == dump_config(manufactured_config(60, 1e-4)));
}

TEST_CASE("config errors are listed with positions") {
  const std::string text =
      "scenario: ablation\n"
      "mesh:\n"
      "  cells: [10, 4]\n"
      "  colour: red\n"
      "time: {t0: 0.0, tf: 1.0, dt: -1}\n"
      "material: {rho: 1, c: 1, k: 0, L: 1, T_m: 0.1}\n"
      "level_set: {type: wedge}\n";
  try {
    parse_config(text);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    const std::string w = e.what();
    CHECK(w.find("4:3: mesh.colour: unknown key") != std::string::npos);
    CHECK(w.find("level_set.type") != std::string::npos);
    CHECK(w.find("5:1: time: dt must be positive") != std::string::npos);
    CHECK(w.find("6:1: material:") != std::string::npos);
  }
  CHECK_THROWS_WITH_AS(parse_config("mesh: [1, 2\n"), doctest::Contains("syntax"), ConfigError);
  CHECK_THROWS_AS(parse_config(""), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/run.yaml"), IoError);
}

TEST_CASE("vtk output of a half-plane cut") {
  const auto mesh = BackgroundMesh::build_structured({{0, 0}, {3, 1.2}}, 12, 6);
  const auto phi = LevelSetField::interpolate(mesh, [](const Vec2& x) { return x.y() - 0.6; });
  const CutGeometry g = build_cut_geometry(phi);
  const auto V = FunctionSpace::p1_active(g);
  const FeField T(V, Eigen::VectorXd::Constant(V->n_dofs(), 0.25));
  const std::string dir = temp_dir("vtk");
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/d.vtk";
  write_vtk(path, g, T, phi);
  const VtkGrid r = read_vtk(path);
  CHECK(r.cells.size() == g.physical_subtris.size());
  double area = 0.0;
  for (const auto& c : r.cells) area += signed_area(r.points[c[0]], r.points[c[1]], r.points[c[2]]);
  CHECK(std::abs(area - 0.5 * 3.6) < 1e-12);
  // Written coordinates parse back to the same doubles.
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    for (int k = 0; k < 3; ++k) CHECK((r.points[r.cells[i][k]] - g.physical_subtris[i].vertices[k]).norm() == 0.0);
  }

  write_interface_vtk(dir + "/i.vtk", g);
  CHECK(read_vtk(dir + "/i.vtk").cells.size() == g.interface_segments.size());
  CutGeometry none = g;
  none.interface_segments.clear();
  write_interface_vtk(dir + "/e.vtk", none);
  CHECK(read_file(dir + "/e.vtk").find("CELLS 0 0") != std::string::npos);
  CHECK_THROWS_AS(write_interface_vtk("/nonexistent/dir/x.vtk", g), IoError);
}

TEST_CASE("state snapshot round trip") {
  const auto mesh = BackgroundMesh::build_structured({{0, 0}, {1, 1}}, 5, 5);
  auto phi = LevelSetField::interpolate(mesh, [](const Vec2& x) { return std::sin(x.x()) / 3 + x.y() - 0.7; });
  NodalTemperature T{Eigen::VectorXd::LinSpaced(mesh->n_vertices(), -1.0 / 3, 2.0 / 7),
                     std::vector<char>(mesh->n_vertices(), 1)};
  T.defined[3] = 0;
  StefanState s{0.1 + 0.2, 17, phi, T, {}, {}};
  s.vn_ext = FeField(FunctionSpace::p1_background(mesh), Eigen::VectorXd::Constant(mesh->n_vertices(), 1.0 / 7));
  const std::string dir = temp_dir("snap");
  std::filesystem::create_directories(dir);
  save_state(dir + "/s.json", s);
  const StefanState r = load_state(dir + "/s.json", mesh);
  CHECK(r.t == s.t);
  CHECK(r.step == 17);
  CHECK((r.phi.coefficients() - phi.coefficients()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.T.values - T.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.T.defined == T.defined);
  CHECK_FALSE(r.v_ext);
  REQUIRE(r.vn_ext);
  CHECK(r.vn_ext->coeffs[4] == 1.0 / 7);
  const auto other = BackgroundMesh::build_structured({{0, 0}, {1, 1}}, 4, 4);
  CHECK_THROWS_AS(load_state(dir + "/s.json", other), IoError);
}

TEST_CASE("surface profile and cavity metrics") {
  const auto mesh = BackgroundMesh::build_structured({{0, 0}, {3, 1.2}}, 30, 12);
  const auto flat = build_cut_geometry(LevelSetField::interpolate(mesh, [](const Vec2& x) { return x.y() - 0.93; }));
  const auto prof = surface_profile(flat, 0.5, 2.5, 41);
  REQUIRE(prof.size() == 41);
  for (const auto& s : prof) CHECK(s.height == doctest::Approx(0.93).epsilon(1e-12));
  const CavityMetrics m = cavity_metrics(prof, 1.0);
  CHECK(m.depth == doctest::Approx(0.07));
  CHECK(m.roughness < 1e-12);
  const CavityMetrics w = cavity_metrics({{0, 1.0}, {1, 0.8}}, 1.0);
  CHECK(w.depth == doctest::Approx(0.1));
  CHECK(w.roughness == doctest::Approx(0.1));
}

TEST_CASE("run without beam keeps the geometry") {
  set_log_sink({});
  RunConfig c = small_ablation(temp_dir("nobeam"));
  c.beam.reset();
  c.T_initial = -0.5;
  c.T_dirichlet = 0.0;
  const RunResult r = run(c);
  reset_log_sink();
  REQUIRE(r.ok);
  CHECK(r.steps == 20);
  REQUIRE(r.cavity);
  CHECK(std::abs(r.cavity->depth) < 1e-12);
  const StefanState s = load_state(c.output.dir + "/state.json", c.mesh());
  const auto phi0 = c.initial_level_set(c.mesh());
  CHECK((s.phi.coefficients() - phi0.coefficients()).cwiseAbs().maxCoeff() < 1e-12);
  double mean = 0.0;
  int n = 0;
  for (int v = 0; v < s.T.values.size(); ++v) {
    if (!s.T.defined[v]) continue;
    mean += s.T.values[v];
    ++n;
  }
  mean /= n;
  CHECK(mean > -0.5);
  CHECK(mean < 0.0);
}

TEST_CASE("empty time interval writes the initial state") {
  RunConfig c = small_ablation(temp_dir("empty"));
  c.tf = c.t0;
  c.beam->path.tf = c.tf;
  const RunResult r = run(c);
  CHECK(r.ok);
  CHECK(r.steps == 0);
  CHECK(std::filesystem::exists(c.output.dir + "/domain_000000.vtk"));
  CHECK(std::filesystem::exists(c.output.dir + "/interface_000000.vtk"));
  CHECK(std::filesystem::exists(c.output.dir + "/state.json"));
}

TEST_CASE("runs are deterministic and restartable") {
  set_log_sink({});
  const RunConfig a = small_ablation(temp_dir("det_a"));
  RunConfig b = a;
  b.output.dir = temp_dir("det_b");
  REQUIRE(run(a).ok);
  REQUIRE(run(b).ok);
  CHECK(read_file(a.output.dir + "/steps.csv") == read_file(b.output.dir + "/steps.csv"));
  CHECK(read_file(a.output.dir + "/profile.csv") == read_file(b.output.dir + "/profile.csv"));

  RunConfig half = a;
  half.output.dir = temp_dir("det_half");
  half.tf = 0.01;
  half.beam->path.tf = a.tf;
  REQUIRE(run(half).ok);
  RunConfig rest = a;
  rest.output.dir = temp_dir("det_rest");
  RunOptions o;
  o.restart = half.output.dir + "/state.json";
  const RunResult r = run(rest, o);
  reset_log_sink();
  REQUIRE(r.ok);
  CHECK(r.steps == 10);
  CHECK(read_file(rest.output.dir + "/domain_000020.vtk") == read_file(a.output.dir + "/domain_000020.vtk"));
  CHECK(read_file(rest.output.dir + "/state.json") == read_file(a.output.dir + "/state.json"));
}
