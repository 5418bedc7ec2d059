#include "cutstefan/output.hpp"

#include "cutstefan/element.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <map>

namespace cutstefan {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  return out;
}

void close_out(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw IoError("write to " + path + " failed");
}

} // namespace

void write_vtk(const std::string& path, const CutGeometry& geometry, const FeField& T,
               const LevelSetField& phi, const FeField* vn_ext) {
  const BackgroundMesh& mesh = *geometry.mesh;
  std::map<std::pair<double, double>, int> index;
  std::vector<Vec2> points;
  std::vector<int> point_cell;
  std::vector<std::array<int, 3>> tris;
  for (const SubTriangle& st : geometry.physical_subtris) {
    std::array<int, 3> t{};
    for (int k = 0; k < 3; ++k) {
      const Vec2& x = st.vertices[k];
      const auto [it, fresh] = index.try_emplace({x.x(), x.y()}, static_cast<int>(points.size()));
      if (fresh) {
        points.push_back(x);
        point_cell.push_back(st.parent);
      }
      t[k] = it->second;
    }
    tris.push_back(t);
  }

  std::ofstream out = open_out(path);
  out << "# vtk DataFile Version 3.0\ncut material domain\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << points.size() << " double\n";
  for (const Vec2& p : points) out << p.x() << ' ' << p.y() << " 0\n";
  out << "CELLS " << tris.size() << ' ' << 4 * tris.size() << '\n';
  for (const auto& t : tris) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << tris.size() << '\n';
  for (std::size_t i = 0; i < tris.size(); ++i) out << "5\n";

  out << "CELL_DATA " << tris.size() << "\nSCALARS parent int 1\nLOOKUP_TABLE default\n";
  for (const SubTriangle& st : geometry.physical_subtris) out << st.parent << '\n';
  out << "SCALARS cut int 1\nLOOKUP_TABLE default\n";
  for (const SubTriangle& st : geometry.physical_subtris) {
    out << (geometry.location[st.parent] == CellLocation::Cut ? 1 : 0) << '\n';
  }

  out << "POINT_DATA " << points.size() << "\nSCALARS T double 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int c = point_cell[i];
    out << T.value(c, P1Element(mesh.cell_vertices(c)).barycentric(points[i])) << '\n';
  }
  out << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int c = point_cell[i];
    out << phi.value(c, P1Element(mesh.cell_vertices(c)).barycentric(points[i])) << '\n';
  }
  out << "SCALARS vn_ext double 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int c = point_cell[i];
    out << (vn_ext ? vn_ext->value(c, P1Element(mesh.cell_vertices(c)).barycentric(points[i])) : 0.0) << '\n';
  }
  close_out(out, path);
}

void write_interface_vtk(const std::string& path, const CutGeometry& geometry) {
  const auto& segs = geometry.interface_segments;
  std::ofstream out = open_out(path);
  out << "# vtk DataFile Version 3.0\ninterface\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << 2 * segs.size() << " double\n";
  for (const InterfaceSegment& s : segs) {
    out << s.a.x() << ' ' << s.a.y() << " 0\n" << s.b.x() << ' ' << s.b.y() << " 0\n";
  }
  out << "CELLS " << segs.size() << ' ' << 3 * segs.size() << '\n';
  for (std::size_t i = 0; i < segs.size(); ++i) out << "2 " << 2 * i << ' ' << 2 * i + 1 << '\n';
  out << "CELL_TYPES " << segs.size() << '\n';
  for (std::size_t i = 0; i < segs.size(); ++i) out << "3\n";
  close_out(out, path);
}

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const nlohmann::json& j, Eigen::Index size, const char* what) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != size) {
    throw IoError(std::string("snapshot field ") + what + " has the wrong size");
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), size);
}

} // namespace

void save_state(const std::string& path, const StefanState& s) {
  nlohmann::json j;
  j["format"] = "cutstefan-state";
  j["version"] = 1;
  j["t"] = s.t;
  j["step"] = s.step;
  j["vertices"] = s.phi.mesh()->n_vertices();
  j["phi"] = vec_json(s.phi.coefficients());
  j["T"] = vec_json(s.T.values);
  j["T_defined"] = std::vector<int>(s.T.defined.begin(), s.T.defined.end());
  if (s.v_ext) j["v_ext"] = vec_json(s.v_ext->coeffs);
  if (s.vn_ext) j["vn_ext"] = vec_json(s.vn_ext->coeffs);
  std::ofstream out = open_out(path);
  out << j.dump(1) << '\n';
  close_out(out, path);
}

StefanState load_state(const std::string& path, const MeshPtr& mesh) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open snapshot " + path);
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("format") != "cutstefan-state") throw IoError("not a state snapshot: " + path);
    if (j.at("vertices").get<int>() != mesh->n_vertices()) {
      throw IoError("snapshot " + path + " was written for a different mesh");
    }
    const int nv = mesh->n_vertices();
    StefanState s{j.at("t").get<double>(), j.at("step").get<int>(),
                  LevelSetField(mesh, vec_from(j.at("phi"), mesh->n_p2_nodes(), "phi")),
                  {vec_from(j.at("T"), nv, "T"), {}}, {}, {}};
    const auto def = j.at("T_defined").get<std::vector<int>>();
    if (static_cast<int>(def.size()) != nv) throw IoError("snapshot field T_defined has the wrong size");
    s.T.defined.assign(def.begin(), def.end());
    if (j.contains("v_ext")) {
      s.v_ext = FeField(FunctionSpace::p1_background(mesh, 2), vec_from(j["v_ext"], 2 * nv, "v_ext"));
    }
    if (j.contains("vn_ext")) {
      s.vn_ext = FeField(FunctionSpace::p1_background(mesh), vec_from(j["vn_ext"], nv, "vn_ext"));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed snapshot " + path + ": " + e.what());
  }
}

std::vector<SurfaceSample> surface_profile(const CutGeometry& geometry, double x0, double x1, int n) {
  if (n < 1) throw ConfigError("surface profile needs at least one sample");
  std::vector<SurfaceSample> out;
  for (int i = 0; i < n; ++i) {
    const double x = n == 1 ? 0.5 * (x0 + x1) : x0 + (x1 - x0) * i / (n - 1);
    double best = -std::numeric_limits<double>::infinity();
    for (const InterfaceSegment& s : geometry.interface_segments) {
      const double lo = std::min(s.a.x(), s.b.x()), hi = std::max(s.a.x(), s.b.x());
      if (x < lo || x > hi) continue;
      if (hi == lo) {
        best = std::max({best, s.a.y(), s.b.y()});
        continue;
      }
      const double u = (x - s.a.x()) / (s.b.x() - s.a.x());
      best = std::max(best, s.a.y() + u * (s.b.y() - s.a.y()));
    }
    if (std::isfinite(best)) out.push_back({x, best});
  }
  return out;
}

CavityMetrics cavity_metrics(const std::vector<SurfaceSample>& profile, double surface0) {
  CavityMetrics m;
  m.samples = static_cast<int>(profile.size());
  if (profile.empty()) return m;
  double mean = 0.0;
  for (const SurfaceSample& s : profile) mean += s.height;
  mean /= m.samples;
  double var = 0.0;
  for (const SurfaceSample& s : profile) var += (s.height - mean) * (s.height - mean);
  m.depth = surface0 - mean;
  m.roughness = std::sqrt(var / m.samples);
  return m;
}

void write_profile_csv(const std::string& path, const std::vector<SurfaceSample>& profile) {
  std::ofstream out = open_out(path);
  out << "x,height\n";
  for (const SurfaceSample& s : profile) out << s.x << ',' << s.height << '\n';
  close_out(out, path);
}

} // namespace cutstefan
