#include "cutstefan/app.hpp"
#include "cutstefan/manufactured.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cutstefan;

namespace {

Eigen::MatrixXd points(const std::vector<Vec2>& v) {
  Eigen::MatrixXd out(v.size(), 2);
  for (std::size_t i = 0; i < v.size(); ++i) out.row(i) = v[i].transpose();
  return out;
}

py::dict step_dict(const StepRecord& r) {
  py::dict d;
  d["step"] = r.step;
  d["t_begin"] = r.t_begin;
  d["t_end"] = r.t_end;
  int iterations = 0;
  double violation = 0.0;
  for (const NewtonReport& n : r.newton) {
    iterations += n.iterations;
    violation = std::max(violation, n.max_violation);
  }
  d["newton_iterations"] = iterations;
  d["max_violation"] = violation;
  d["retried"] = r.retried;
  d["redistanced"] = r.redistanced;
  d["cfl"] = r.cfl;
  d["active_dofs"] = r.active_dofs;
  return d;
}

py::dict aggregate_dict(const ErrorAggregate& a) {
  py::dict d;
  d["T_l2"] = a.T_l2;
  d["T_h1"] = a.T_h1;
  d["T_gamma"] = a.T_gamma;
  d["velocity"] = a.velocity;
  d["radius"] = a.radius;
  d["max_radius_deviation"] = a.max_radius_deviation;
  return d;
}

/// Step-by-step driver built from a run configuration.
class PySimulation {
public:
  explicit PySimulation(const RunConfig& c)
      : sim_(c.problem(), c.initial_level_set(c.mesh()), c.simulation) {}

  py::dict step() {
    StepRecord r;
    {
      py::gil_scoped_release release;
      r = sim_.step();
    }
    return step_dict(r);
  }
  double t() const { return sim_.state().t; }
  int steps() const { return sim_.state().step; }
  bool finished() const { return sim_.finished(); }
  int total_steps() const { return sim_.total_steps(); }
  Eigen::VectorXd level_set() const { return sim_.state().phi.coefficients(); }
  Eigen::VectorXd temperature() const { return sim_.state().T.values; }
  const CutGeometry& geometry() { return sim_.geometry(); }

private:
  Simulation sim_;
};

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cut finite element solver for the one-phase Stefan-Signorini ablation problem";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", error);
  py::register_exception<IoError>(m, "IoError", error);
  py::register_exception<GeometryError>(m, "GeometryError", error);
  py::register_exception<SolverError>(m, "SolverError", error);
  py::register_exception<AssemblyError>(m, "AssemblyError", error);

  py::class_<BackgroundMesh, std::shared_ptr<BackgroundMesh>>(m, "Mesh")
      .def_property_readonly("nx", &BackgroundMesh::nx)
      .def_property_readonly("ny", &BackgroundMesh::ny)
      .def_property_readonly("n_vertices", &BackgroundMesh::n_vertices)
      .def_property_readonly("n_cells", &BackgroundMesh::n_cells)
      .def_property_readonly("n_p2_nodes", &BackgroundMesh::n_p2_nodes)
      .def_property_readonly("h_max", &BackgroundMesh::h_max)
      .def_property_readonly("vertices", [](const BackgroundMesh& mesh) { return points(mesh.vertices()); })
      .def_property_readonly("triangles", [](const BackgroundMesh& mesh) {
        Eigen::MatrixXi t(mesh.n_cells(), 3);
        for (int c = 0; c < mesh.n_cells(); ++c) {
          for (int k = 0; k < 3; ++k) t(c, k) = mesh.triangles()[c][k];
        }
        return t;
      });

  m.def(
      "structured_mesh",
      [](const Vec2& lo, const Vec2& hi, int nx, int ny) {
        return std::const_pointer_cast<BackgroundMesh>(BackgroundMesh::build_structured({lo, hi}, nx, ny));
      },
      py::arg("lo"), py::arg("hi"), py::arg("nx"), py::arg("ny"),
      "Right-diagonal triangulation of the rectangle [lo, hi].");

  py::class_<LevelSetField>(m, "LevelSet")
      .def(py::init([](const std::shared_ptr<BackgroundMesh>& mesh, const Eigen::VectorXd& c) {
             return LevelSetField(mesh, c);
           }),
           py::arg("mesh"), py::arg("coefficients"))
      .def_static(
          "interpolate",
          [](const std::shared_ptr<BackgroundMesh>& mesh, const std::function<double(double, double)>& f) {
            return LevelSetField::interpolate(mesh, [&](const Vec2& x) { return f(x.x(), x.y()); });
          },
          py::arg("mesh"), py::arg("function"), "P2 interpolant of f(x, y); negative in the material.")
      .def_property_readonly("coefficients", [](const LevelSetField& phi) { return phi.coefficients(); })
      .def("value_at", [](const LevelSetField& phi, double x, double y) { return phi.value_at({x, y}); });

  py::class_<CutGeometry>(m, "CutGeometry")
      .def_property_readonly("physical_area", &CutGeometry::physical_area)
      .def_property_readonly("interface_length", &CutGeometry::interface_length)
      .def_readonly("active_cells", &CutGeometry::active_cells)
      .def_readonly("cut_cells", &CutGeometry::cut_cells)
      .def_readonly("ghost_faces", &CutGeometry::ghost_faces)
      .def_property_readonly("interface_segments", [](const CutGeometry& g) {
        Eigen::MatrixXd s(g.interface_segments.size(), 4);
        for (std::size_t i = 0; i < g.interface_segments.size(); ++i) {
          const InterfaceSegment& seg = g.interface_segments[i];
          s.row(i) << seg.a.x(), seg.a.y(), seg.b.x(), seg.b.y();
        }
        return s;
      });

  m.def(
      "cut",
      [](const LevelSetField& phi) { return build_cut_geometry(phi); }, py::arg("phi"),
      "Cut geometry of the material domain {phi < 0}.");

  py::class_<RunConfig>(m, "RunConfig")
      .def_property_readonly("scenario",
                             [](const RunConfig& c) {
                               return c.scenario == Scenario::Manufactured ? "manufactured" : "ablation";
                             })
      .def_readwrite("nx", &RunConfig::nx)
      .def_readwrite("ny", &RunConfig::ny)
      .def_readwrite("t0", &RunConfig::t0)
      .def_readwrite("tf", &RunConfig::tf)
      .def_readwrite("dt", &RunConfig::dt)
      .def_property(
          "output_dir", [](const RunConfig& c) { return c.output.dir; },
          [](RunConfig& c, const std::string& d) { c.output.dir = d; })
      .def_property(
          "output_every", [](const RunConfig& c) { return c.output.every; },
          [](RunConfig& c, int n) { c.output.every = n; })
      .def_property(
          "write_vtk", [](const RunConfig& c) { return c.output.vtk; },
          [](RunConfig& c, bool v) { c.output.vtk = v; })
      .def_property_readonly("has_beam", [](const RunConfig& c) { return c.beam.has_value(); })
      .def("problems",
           [](const RunConfig& c) {
             std::vector<std::pair<std::string, std::string>> out;
             for (const auto& p : c.problems()) out.emplace_back(p.key, p.message);
             return out;
           })
      .def("validate", &RunConfig::validate)
      .def("mesh", [](const RunConfig& c) { return std::const_pointer_cast<BackgroundMesh>(c.mesh()); })
      .def("initial_level_set", [](const RunConfig& c) { return c.initial_level_set(c.mesh()); })
      .def("dump", &dump_config);

  m.def("parse_config", &parse_config, py::arg("yaml_text"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("pulsed_ablation_config", &pulsed_ablation_config, py::arg("period"));
  m.def("manufactured_config", &manufactured_config, py::arg("cells"), py::arg("dt"), py::arg("tf") = 0.1);

  py::class_<PySimulation>(m, "Simulation")
      .def(py::init<const RunConfig&>(), py::arg("config"))
      .def("step", &PySimulation::step)
      .def_property_readonly("t", &PySimulation::t)
      .def_property_readonly("steps", &PySimulation::steps)
      .def_property_readonly("finished", &PySimulation::finished)
      .def_property_readonly("total_steps", &PySimulation::total_steps)
      .def_property_readonly("level_set", &PySimulation::level_set)
      .def_property_readonly("temperature", &PySimulation::temperature)
      .def("geometry", &PySimulation::geometry, py::return_value_policy::copy);

  m.def(
      "run",
      [](const RunConfig& c, std::optional<std::string> restart) {
        RunOptions o;
        o.restart = std::move(restart);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(c, o);
        }
        py::dict d;
        d["ok"] = r.ok;
        d["error"] = r.error;
        d["steps"] = r.steps;
        d["t"] = r.t;
        d["retries"] = r.retries;
        d["redistances"] = r.redistances;
        d["files"] = r.files;
        if (r.cavity) {
          d["depth"] = r.cavity->depth;
          d["roughness"] = r.cavity->roughness;
        }
        if (r.errors) d["errors"] = aggregate_dict(*r.errors);
        return d;
      },
      py::arg("config"), py::arg("restart") = py::none(), "Runs a configuration and writes its outputs.");

  m.def(
      "run_manufactured",
      [](int cells, double dt, double tf) {
        ManufacturedRunOptions o;
        o.cells = cells;
        o.dt = dt;
        o.tf = tf;
        ManufacturedRun r;
        {
          py::gil_scoped_release release;
          r = run_manufactured(o);
        }
        if (r.failed) throw SolverError(r.message);
        py::dict d = aggregate_dict(r.report.aggregate());
        d["h"] = r.h;
        d["steps"] = static_cast<int>(r.records.size());
        d["final_T_l2"] = r.report.final_T.l2.value;
        return d;
      },
      py::arg("cells") = 60, py::arg("dt") = 1e-4, py::arg("tf") = 0.1,
      "Relative errors against the exact growing-hole solution.");

  m.def("alpha", &ManufacturedCase::alpha, py::arg("t"));
  m.def("radius", &ManufacturedCase::radius, py::arg("t"));
  m.def(
      "exact_temperature", [](double x, double y, double t) { return ManufacturedCase().temperature({x, y}, t); },
      py::arg("x"), py::arg("y"), py::arg("t"));
  m.def("pulse", &pulse, py::arg("t"), py::arg("period"));
  m.def("absorption", &absorption_cos, py::arg("cos_theta"), py::arg("epsilon") = 1.0);
}
