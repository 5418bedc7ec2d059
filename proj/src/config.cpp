#include "cutstefan/config.hpp"

#include "cutstefan/manufactured.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cutstefan {

std::function<double(const Vec2&)> LevelSetInit::function() const {
  switch (kind) {
    case Kind::Plane: {
      const Vec2 n = normal.normalized();
      const Vec2 p = point;
      return [n, p](const Vec2& x) { return (x - p).dot(n); };
    }
    case Kind::Circle: {
      const Vec2 c = center;
      const double r = radius, s = material_inside ? 1.0 : -1.0;
      return [c, r, s](const Vec2& x) { return s * ((x - c).norm() - r); };
    }
    case Kind::Expression: {
      const Expression e(expression);
      return [e](const Vec2& x) { return e(x); };
    }
  }
  throw ConfigError("unknown level set kind");
}

std::vector<RunConfig::Problem> RunConfig::problems() const {
  std::vector<Problem> out;
  auto check = [&](const char* key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      out.push_back({key, e.what()});
    }
  };
  if (!(domain.hi.x() > domain.lo.x()) || !(domain.hi.y() > domain.lo.y())) {
    out.push_back({"mesh", "domain must have positive width and height"});
  }
  if (nx < 1 || ny < 1) out.push_back({"mesh", "cells must be positive"});
  if (!(dt > 0.0)) out.push_back({"time", "dt must be positive"});
  if (!(tf >= t0)) out.push_back({"time", "need t0 <= tf"});
  check("material", [&] { material.validate(); });
  check("nitsche", [&] { nitsche.validate(); });
  if (beam) check("beam", [&] { beam->validate(); });
  if (scenario == Scenario::Ablation) {
    switch (level_set.kind) {
      case LevelSetInit::Kind::Plane:
        if (!(level_set.normal.norm() > 0.0)) out.push_back({"level_set", "plane normal must be nonzero"});
        break;
      case LevelSetInit::Kind::Circle:
        if (!(level_set.radius > 0.0)) out.push_back({"level_set", "circle radius must be positive"});
        break;
      case LevelSetInit::Kind::Expression:
        check("level_set", [&] { Expression e(level_set.expression); });
        break;
    }
    if (!std::isfinite(T_initial) || !std::isfinite(T_dirichlet) || !std::isfinite(q_neumann)) {
      out.push_back({"temperature", "temperature data must be finite"});
    }
  }
  if (!(simulation.theta_transport >= 0.0 && simulation.theta_transport <= 1.0)) {
    out.push_back({"solver", "theta_transport must lie in [0, 1]"});
  }
  if (!(simulation.band_factor > 0.0)) out.push_back({"solver", "extension_band must be positive"});
  if (simulation.newton.max_iterations < 1) out.push_back({"solver", "newton_max_iterations must be >= 1"});
  if (output.every < 1) out.push_back({"output", "every must be >= 1"});
  if (output.dir.empty()) out.push_back({"output", "dir must not be empty"});
  if (output.profile && !(output.profile->second > output.profile->first)) {
    out.push_back({"output", "profile range must be increasing"});
  }
  return out;
}

void RunConfig::validate() const {
  const auto p = problems();
  if (p.empty()) return;
  std::string msg = "invalid configuration:";
  for (const Problem& q : p) msg += "\n  " + q.key + ": " + q.message;
  throw ConfigError(msg);
}

MeshPtr RunConfig::mesh() const { return BackgroundMesh::build_structured(domain, nx, ny); }

ProblemSpec RunConfig::problem() const {
  if (scenario == Scenario::Manufactured) {
    ManufacturedCase mc;
    mc.domain = domain;
    return mc.problem(dt, t0, tf, nitsche);
  }
  ProblemSpec s;
  s.material = material;
  s.nitsche = nitsche;
  const double T0 = T_initial, TD = T_dirichlet, qN = q_neumann;
  s.T_0 = [T0](const Vec2&, double) { return T0; };
  s.T_D = [TD](const Vec2&, double) { return TD; };
  if (qN != 0.0) s.q_N = [qN](const Vec2&, double) { return qN; };
  if (beam) s.beam = std::make_shared<GaussianBeam>(*beam);
  s.boundary = boundary;
  s.dt = dt;
  s.t0 = t0;
  s.tf = tf;
  return s;
}

LevelSetField RunConfig::initial_level_set(const MeshPtr& m) const {
  if (scenario == Scenario::Manufactured) {
    const double t = t0;
    return LevelSetField::interpolate(m, [t](const Vec2& x) { return ManufacturedCase().level_set(x, t); });
  }
  return LevelSetField::interpolate(m, level_set.function());
}

RunConfig pulsed_ablation_config(double P0) {
  RunConfig c;
  BeamSpec b;
  b.sigma = 0.1;
  b.A_amp = 2.0;
  b.e_ray = {0.0, -1.0};
  b.P0 = P0;
  b.path.kind = PathKind::Raster;
  b.path.start = {0.5, 1.0};
  b.path.velocity = {5.0, 0.0};
  b.path.t_change = 0.4;
  b.path.t0 = c.t0;
  b.path.tf = c.tf;
  c.beam = b;
  std::ostringstream dir;
  dir << "output/pulsed_P0_" << P0;
  c.output.dir = dir.str();
  // Cavity floor: the scanned segment less two beam widths at each turning point.
  const double x1 = b.path.start.x() + b.path.velocity.norm() * b.path.t_change;
  c.output.profile = {b.path.start.x() + 2.0 * b.sigma, x1 - 2.0 * b.sigma};
  return c;
}

RunConfig manufactured_config(int cells, double dt, double tf) {
  RunConfig c;
  c.scenario = Scenario::Manufactured;
  c.domain = ManufacturedCase().domain;
  c.nx = c.ny = cells;
  c.t0 = 0.0;
  c.tf = tf;
  c.dt = dt;
  c.material = ManufacturedCase().material;
  c.boundary = kAllDirichlet;
  c.output.dir = "output/manufactured";
  return c;
}

namespace {

std::string where(const YAML::Mark& m) {
  if (m.line < 0) return "?:?";
  return std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

/// Reads one YAML mapping, remembering every problem with its position.
class Reader {
public:
  explicit Reader(std::vector<std::string>& issues) : issues_(issues) {}

  void issue(const YAML::Node& n, const std::string& path, const std::string& msg) {
    issues_.push_back(where(n.Mark()) + ": " + path + ": " + msg);
  }

  /// Flags keys outside the allowed set.
  void keys(const YAML::Node& map, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!map.IsMap()) {
      issue(map, path, "expected a mapping");
      return;
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : map) {
      const std::string k = kv.first.as<std::string>();
      if (!ok.count(k)) issue(kv.first, path.empty() ? k : path + "." + k, "unknown key");
    }
  }

  template <class T>
  void read(const YAML::Node& map, const char* key, const std::string& path, T& out) {
    const YAML::Node n = map[key];
    if (!n) return;
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      issue(n, path + "." + key, "cannot read value '" + (n.IsScalar() ? n.Scalar() : std::string("<node>")) + "'");
    }
  }

  void read_vec(const YAML::Node& map, const char* key, const std::string& path, Vec2& out) {
    const YAML::Node n = map[key];
    if (!n) return;
    if (!n.IsSequence() || n.size() != 2) {
      issue(n, path + "." + key, "expected a pair [a, b]");
      return;
    }
    try {
      out = {n[0].as<double>(), n[1].as<double>()};
    } catch (const YAML::Exception&) {
      issue(n, path + "." + key, "expected two numbers");
    }
  }

  template <class E>
  void read_enum(const YAML::Node& map, const char* key, const std::string& path,
                 const std::map<std::string, E>& choices, E& out) {
    const YAML::Node n = map[key];
    if (!n) return;
    const std::string v = n.IsScalar() ? n.Scalar() : "";
    const auto it = choices.find(v);
    if (it == choices.end()) {
      std::string list;
      for (const auto& [name, e] : choices) list += (list.empty() ? "" : ", ") + name;
      issue(n, path + "." + key, "'" + v + "' is not one of " + list);
      return;
    }
    out = it->second;
  }

private:
  std::vector<std::string>& issues_;
};

} // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("invalid configuration:\n  " + where(e.mark) + ": syntax: " + e.msg);
  }
  std::vector<std::string> issues;
  Reader r(issues);
  RunConfig c;
  if (!root || root.IsNull()) throw ConfigError("invalid configuration:\n  empty document");
  r.keys(root, "", {"scenario", "mesh", "time", "material", "nitsche", "boundary", "temperature",
                    "level_set", "beam", "solver", "output"});
  if (!root.IsMap()) throw ConfigError("invalid configuration:\n  " + issues.front());

  r.read_enum(root, "scenario", "", std::map<std::string, Scenario>{{"ablation", Scenario::Ablation},
                                                                     {"manufactured", Scenario::Manufactured}},
              c.scenario);
  if (c.scenario == Scenario::Manufactured) {
    const RunConfig m = manufactured_config(60, 1e-4);
    c.domain = m.domain;
    c.material = m.material;
    c.boundary = m.boundary;
    c.t0 = 0.0;
    c.tf = 0.1;
    c.dt = 1e-4;
  }

  std::map<std::string, YAML::Mark> marks;
  for (const auto& kv : root) marks[kv.first.as<std::string>()] = kv.first.Mark();

  if (const YAML::Node m = root["mesh"]) {
    r.keys(m, "mesh", {"domain", "cells"});
    if (const YAML::Node d = m["domain"]) {
      if (!d.IsSequence() || d.size() != 2) {
        r.issue(d, "mesh.domain", "expected [[x0, y0], [x1, y1]]");
      } else {
        YAML::Node holder;
        holder["lo"] = d[0];
        holder["hi"] = d[1];
        r.read_vec(holder, "lo", "mesh.domain", c.domain.lo);
        r.read_vec(holder, "hi", "mesh.domain", c.domain.hi);
      }
    }
    if (const YAML::Node n = m["cells"]) {
      if (n.IsScalar()) {
        r.read(m, "cells", "mesh", c.nx);
        c.ny = c.nx;
      } else if (n.IsSequence() && n.size() == 2) {
        try {
          c.nx = n[0].as<int>();
          c.ny = n[1].as<int>();
        } catch (const YAML::Exception&) {
          r.issue(n, "mesh.cells", "expected two integers");
        }
      } else {
        r.issue(n, "mesh.cells", "expected an integer or [nx, ny]");
      }
    }
  }
  if (const YAML::Node t = root["time"]) {
    r.keys(t, "time", {"t0", "tf", "dt"});
    r.read(t, "t0", "time", c.t0);
    r.read(t, "tf", "time", c.tf);
    r.read(t, "dt", "time", c.dt);
  }
  if (const YAML::Node m = root["material"]) {
    r.keys(m, "material", {"rho", "c", "k", "L", "T_m"});
    r.read(m, "rho", "material", c.material.rho);
    r.read(m, "c", "material", c.material.c);
    r.read(m, "k", "material", c.material.k);
    r.read(m, "L", "material", c.material.L);
    r.read(m, "T_m", "material", c.material.T_m);
  }
  if (const YAML::Node m = root["nitsche"]) {
    r.keys(m, "nitsche", {"theta1", "theta2", "gamma_hat", "gamma_T", "gamma_b", "gamma_GT"});
    r.read(m, "theta1", "nitsche", c.nitsche.theta1);
    r.read(m, "theta2", "nitsche", c.nitsche.theta2);
    r.read(m, "gamma_hat", "nitsche", c.nitsche.gamma_hat);
    r.read(m, "gamma_T", "nitsche", c.nitsche.gamma_T);
    r.read(m, "gamma_b", "nitsche", c.nitsche.gamma_b);
    r.read(m, "gamma_GT", "nitsche", c.nitsche.gamma_GT);
  }
  if (const YAML::Node b = root["boundary"]) {
    r.keys(b, "boundary", {"left", "right", "bottom", "top"});
    const std::map<std::string, BoundaryKind> kinds{{"dirichlet", BoundaryKind::Dirichlet},
                                                    {"neumann", BoundaryKind::Neumann}};
    r.read_enum(b, "left", "boundary", kinds, c.boundary[static_cast<int>(Side::Left)]);
    r.read_enum(b, "right", "boundary", kinds, c.boundary[static_cast<int>(Side::Right)]);
    r.read_enum(b, "bottom", "boundary", kinds, c.boundary[static_cast<int>(Side::Bottom)]);
    r.read_enum(b, "top", "boundary", kinds, c.boundary[static_cast<int>(Side::Top)]);
  }
  if (const YAML::Node t = root["temperature"]) {
    r.keys(t, "temperature", {"initial", "dirichlet", "neumann_flux"});
    r.read(t, "initial", "temperature", c.T_initial);
    r.read(t, "dirichlet", "temperature", c.T_dirichlet);
    r.read(t, "neumann_flux", "temperature", c.q_neumann);
  }
  if (const YAML::Node l = root["level_set"]) {
    r.keys(l, "level_set", {"type", "point", "normal", "center", "radius", "material", "expression"});
    r.read_enum(l, "type", "level_set",
                std::map<std::string, LevelSetInit::Kind>{{"plane", LevelSetInit::Kind::Plane},
                                                          {"circle", LevelSetInit::Kind::Circle},
                                                          {"expression", LevelSetInit::Kind::Expression}},
                c.level_set.kind);
    r.read_vec(l, "point", "level_set", c.level_set.point);
    r.read_vec(l, "normal", "level_set", c.level_set.normal);
    r.read_vec(l, "center", "level_set", c.level_set.center);
    r.read(l, "radius", "level_set", c.level_set.radius);
    r.read_enum(l, "material", "level_set", std::map<std::string, bool>{{"inside", true}, {"outside", false}},
                c.level_set.material_inside);
    r.read(l, "expression", "level_set", c.level_set.expression);
    if (c.level_set.kind == LevelSetInit::Kind::Expression && !l["expression"]) {
      r.issue(l, "level_set.expression", "required for type expression");
    }
  }
  if (const YAML::Node b = root["beam"]) {
    if (b.IsNull()) {
      c.beam.reset();
    } else {
      BeamSpec s;
      s.path.t0 = c.t0;
      s.path.tf = c.tf;
      r.keys(b, "beam", {"sigma", "amplitude", "direction", "epsilon", "period", "t_on", "t_off", "path"});
      r.read(b, "sigma", "beam", s.sigma);
      r.read(b, "amplitude", "beam", s.A_amp);
      r.read_vec(b, "direction", "beam", s.e_ray);
      r.read(b, "epsilon", "beam", s.epsilon);
      r.read(b, "period", "beam", s.P0);
      r.read(b, "t_on", "beam", s.t_on);
      r.read(b, "t_off", "beam", s.t_off);
      if (const YAML::Node p = b["path"]) {
        r.keys(p, "beam.path", {"kind", "start", "velocity", "t_change", "waypoints"});
        r.read_enum(p, "kind", "beam.path",
                    std::map<std::string, PathKind>{{"fixed", PathKind::Fixed},
                                                    {"raster", PathKind::Raster},
                                                    {"waypoints", PathKind::Waypoints}},
                    s.path.kind);
        r.read_vec(p, "start", "beam.path", s.path.start);
        r.read_vec(p, "velocity", "beam.path", s.path.velocity);
        r.read(p, "t_change", "beam.path", s.path.t_change);
        if (const YAML::Node w = p["waypoints"]) {
          if (!w.IsSequence()) {
            r.issue(w, "beam.path.waypoints", "expected a list of [t, x, y]");
          } else {
            for (const YAML::Node& e : w) {
              try {
                if (!e.IsSequence() || e.size() != 3) throw YAML::Exception(e.Mark(), "");
                s.path.waypoints.push_back({e[0].as<double>(), Vec2(e[1].as<double>(), e[2].as<double>())});
              } catch (const YAML::Exception&) {
                r.issue(e, "beam.path.waypoints", "expected [t, x, y]");
              }
            }
          }
        }
      }
      c.beam = s;
    }
  }
  if (const YAML::Node s = root["solver"]) {
    r.keys(s, "solver", {"velocity_gate", "redistance", "theta_transport", "extension_band",
                         "newton_max_iterations", "retry"});
    r.read_enum(s, "velocity_gate", "solver",
                std::map<std::string, VelocityGate>{{"closest", VelocityGate::ClosestInterfacePoint},
                                                    {"pointwise", VelocityGate::Pointwise}},
                c.simulation.velocity.gate);
    r.read(s, "redistance", "solver", c.simulation.redistance);
    r.read(s, "theta_transport", "solver", c.simulation.theta_transport);
    r.read(s, "extension_band", "solver", c.simulation.band_factor);
    r.read(s, "newton_max_iterations", "solver", c.simulation.newton.max_iterations);
    r.read(s, "retry", "solver", c.simulation.retry);
  }
  if (const YAML::Node o = root["output"]) {
    r.keys(o, "output", {"dir", "every", "vtk", "profile"});
    r.read(o, "dir", "output", c.output.dir);
    r.read(o, "every", "output", c.output.every);
    r.read(o, "vtk", "output", c.output.vtk);
    if (o["profile"]) {
      Vec2 p(0.0, 0.0);
      r.read_vec(o, "profile", "output", p);
      c.output.profile = {p.x(), p.y()};
    }
  }

  for (const RunConfig::Problem& p : c.problems()) {
    const auto it = marks.find(p.key);
    const std::string pos = it != marks.end() ? where(it->second) : "?:?";
    issues.push_back(pos + ": " + p.key + ": " + p.message);
  }
  if (!issues.empty()) {
    std::string msg = "invalid configuration:";
    for (const std::string& i : issues) msg += "\n  " + i;
    throw ConfigError(msg);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open configuration file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

/// Shortest text that reads back to the same double.
YAML::Node num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return YAML::Node(std::string(buf, r.ptr));
}

YAML::Node pair(const Vec2& v) {
  YAML::Node n;
  n.SetStyle(YAML::EmitterStyle::Flow);
  n.push_back(num(v.x()));
  n.push_back(num(v.y()));
  return n;
}

const char* kind_name(BoundaryKind k) { return k == BoundaryKind::Dirichlet ? "dirichlet" : "neumann"; }

} // namespace

std::string dump_config(const RunConfig& c) {
  YAML::Node root;
  root["scenario"] = c.scenario == Scenario::Manufactured ? "manufactured" : "ablation";
  YAML::Node dom;
  dom.SetStyle(YAML::EmitterStyle::Flow);
  dom.push_back(pair(c.domain.lo));
  dom.push_back(pair(c.domain.hi));
  root["mesh"]["domain"] = dom;
  YAML::Node cells;
  cells.SetStyle(YAML::EmitterStyle::Flow);
  cells.push_back(c.nx);
  cells.push_back(c.ny);
  root["mesh"]["cells"] = cells;
  root["time"]["t0"] = num(c.t0);
  root["time"]["tf"] = num(c.tf);
  root["time"]["dt"] = num(c.dt);
  root["material"]["rho"] = num(c.material.rho);
  root["material"]["c"] = num(c.material.c);
  root["material"]["k"] = num(c.material.k);
  root["material"]["L"] = num(c.material.L);
  root["material"]["T_m"] = num(c.material.T_m);
  root["nitsche"]["theta1"] = num(c.nitsche.theta1);
  root["nitsche"]["theta2"] = num(c.nitsche.theta2);
  root["nitsche"]["gamma_hat"] = num(c.nitsche.gamma_hat);
  root["nitsche"]["gamma_T"] = num(c.nitsche.gamma_T);
  root["nitsche"]["gamma_b"] = num(c.nitsche.gamma_b);
  root["nitsche"]["gamma_GT"] = num(c.nitsche.gamma_GT);
  root["boundary"]["left"] = kind_name(c.boundary[static_cast<int>(Side::Left)]);
  root["boundary"]["right"] = kind_name(c.boundary[static_cast<int>(Side::Right)]);
  root["boundary"]["bottom"] = kind_name(c.boundary[static_cast<int>(Side::Bottom)]);
  root["boundary"]["top"] = kind_name(c.boundary[static_cast<int>(Side::Top)]);
  root["temperature"]["initial"] = num(c.T_initial);
  root["temperature"]["dirichlet"] = num(c.T_dirichlet);
  root["temperature"]["neumann_flux"] = num(c.q_neumann);
  YAML::Node l;
  switch (c.level_set.kind) {
    case LevelSetInit::Kind::Plane:
      l["type"] = "plane";
      l["point"] = pair(c.level_set.point);
      l["normal"] = pair(c.level_set.normal);
      break;
    case LevelSetInit::Kind::Circle:
      l["type"] = "circle";
      l["center"] = pair(c.level_set.center);
      l["radius"] = num(c.level_set.radius);
      l["material"] = c.level_set.material_inside ? "inside" : "outside";
      break;
    case LevelSetInit::Kind::Expression:
      l["type"] = "expression";
      l["expression"] = c.level_set.expression;
      break;
  }
  root["level_set"] = l;
  if (c.beam) {
    const BeamSpec& b = *c.beam;
    YAML::Node n;
    n["sigma"] = num(b.sigma);
    n["amplitude"] = num(b.A_amp);
    n["direction"] = pair(b.e_ray);
    n["epsilon"] = num(b.epsilon);
    n["period"] = num(b.P0);
    n["t_on"] = num(b.t_on);
    n["t_off"] = num(b.t_off);
    const char* kinds[] = {"fixed", "raster", "waypoints"};
    n["path"]["kind"] = kinds[static_cast<int>(b.path.kind)];
    n["path"]["start"] = pair(b.path.start);
    n["path"]["velocity"] = pair(b.path.velocity);
    n["path"]["t_change"] = num(b.path.t_change);
    if (!b.path.waypoints.empty()) {
      for (const auto& [t, p] : b.path.waypoints) {
        YAML::Node w;
        w.SetStyle(YAML::EmitterStyle::Flow);
        w.push_back(num(t));
        w.push_back(num(p.x()));
        w.push_back(num(p.y()));
        n["path"]["waypoints"].push_back(w);
      }
    }
    root["beam"] = n;
  }
  root["solver"]["velocity_gate"] =
      c.simulation.velocity.gate == VelocityGate::Pointwise ? "pointwise" : "closest";
  root["solver"]["redistance"] = c.simulation.redistance;
  root["solver"]["theta_transport"] = num(c.simulation.theta_transport);
  root["solver"]["extension_band"] = num(c.simulation.band_factor);
  root["solver"]["newton_max_iterations"] = c.simulation.newton.max_iterations;
  root["solver"]["retry"] = c.simulation.retry;
  root["output"]["dir"] = c.output.dir;
  root["output"]["every"] = c.output.every;
  root["output"]["vtk"] = c.output.vtk;
  if (c.output.profile) root["output"]["profile"] = pair({c.output.profile->first, c.output.profile->second});
  YAML::Emitter e;
  e << root;
  return std::string(e.c_str()) + "\n";
}

} // namespace cutstefan
