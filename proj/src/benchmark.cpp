#include "cutstefan/benchmark.hpp"

#include "cutstefan/element.hpp"
#include "cutstefan/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace cutstefan {

namespace {

NormValue ratio(double err2, double ref2) {
  if (ref2 > 0.0) return {std::sqrt(err2 / ref2), true};
  return {std::sqrt(err2), false};
}

template <class Fn>
void for_each_gamma_point(const CutGeometry& g, Fn&& fn) {
  const auto rule = gauss_rule(3);
  for (const InterfaceSegment& seg : g.interface_segments) {
    const double len = seg.length();
    for (const auto& q : rule) fn(seg.parent, seg.a + q.s * (seg.b - seg.a), q.w * len);
  }
}

} // namespace

FieldErrors error_norms(const FeField& u, const ScalarFunction& exact, const VectorFunction& grad_exact,
                        const CutGeometry& geometry) {
  if (!u.space || u.space->components() != 1 || u.space->kind() == SpaceKind::P2Background) {
    throw AssemblyError("error_norms needs a scalar P1 field");
  }
  const BackgroundMesh& mesh = *u.space->mesh();
  const auto rule = triangle_rule(4);
  double e0 = 0.0, r0 = 0.0, e1 = 0.0, r1 = 0.0;
  int current = -1;
  P1Element el;
  for (const SubTriangle& st : geometry.physical_subtris) {
    if (st.parent != current) {
      current = st.parent;
      el = P1Element(mesh.cell_vertices(current));
    }
    const double area = st.area();
    for (const auto& q : rule) {
      const Vec2 x = map_point(q, st.vertices[0], st.vertices[1], st.vertices[2]);
      const Vec3 l = el.barycentric(x);
      const double ex = exact(x);
      const Vec2 gex = grad_exact(x);
      const double d = u.value(current, l) - ex;
      const Vec2 dg = u.gradient(current, l) - gex;
      const double w = q.w * area;
      e0 += w * d * d;
      r0 += w * ex * ex;
      e1 += w * dg.squaredNorm();
      r1 += w * gex.squaredNorm();
    }
  }
  FieldErrors out;
  out.l2 = ratio(e0, r0);
  out.h1 = ratio(e0 + e1, r0 + r1);
  out.gamma_l2 = interface_error(
      geometry,
      [&](int cell, const Vec2& x) { return u.value(cell, P1Element(mesh.cell_vertices(cell)).barycentric(x)); },
      exact);
  return out;
}

NormValue interface_error(const CutGeometry& geometry,
                          const std::function<double(int cell, const Vec2& x)>& computed,
                          const ScalarFunction& exact) {
  if (geometry.interface_segments.empty()) throw GeometryError("interface error on an empty interface");
  double e = 0.0, r = 0.0;
  for_each_gamma_point(geometry, [&](int cell, const Vec2& x, double w) {
    const double ex = exact(x);
    const double d = computed(cell, x) - ex;
    e += w * d * d;
    r += w * ex * ex;
  });
  return ratio(e, r);
}

InterfaceAverages interface_averages(const CutGeometry& geometry, const FeField& v_n, const Vec2& center) {
  if (geometry.interface_segments.empty()) throw GeometryError("interface averages on an empty interface");
  const BackgroundMesh& mesh = *geometry.mesh;
  InterfaceAverages out;
  double sv = 0.0, sr = 0.0;
  for_each_gamma_point(geometry, [&](int cell, const Vec2& x, double w) {
    sv += w * v_n.value(cell, P1Element(mesh.cell_vertices(cell)).barycentric(x));
    sr += w * (x - center).norm();
    out.length += w;
  });
  out.v_avg = sv / out.length;
  out.r_avg = sr / out.length;
  return out;
}

double l2_in_time(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s / static_cast<double>(values.size()));
}

ErrorAggregate ErrorReport::aggregate() const {
  std::vector<double> a, b, c, d, e;
  ErrorAggregate out;
  for (const StepErrors& s : steps) {
    a.push_back(s.T.l2.value);
    b.push_back(s.T.h1.value);
    c.push_back(s.T.gamma_l2.value);
    d.push_back(s.velocity.value);
    e.push_back(s.radius.value);
    out.max_radius_deviation = std::max(out.max_radius_deviation, std::abs(s.r_avg - s.r_exact));
  }
  out.T_l2 = l2_in_time(a);
  out.T_h1 = l2_in_time(b);
  out.T_gamma = l2_in_time(c);
  out.velocity = l2_in_time(d);
  out.radius = l2_in_time(e);
  return out;
}

bool ErrorReport::any_absolute() const {
  for (const StepErrors& s : steps) {
    if (!s.T.l2.relative || !s.T.h1.relative || !s.T.gamma_l2.relative || !s.velocity.relative ||
        !s.radius.relative) {
      return true;
    }
  }
  return false;
}

ManufacturedRun run_manufactured(const ManufacturedRunOptions& options, const ManufacturedCase& mc) {
  ManufacturedRun run;
  run.options = options;
  run.h = mc.domain.width() / options.cells;
  const auto start = std::chrono::steady_clock::now();
  auto T_of = [&](double t) { return [&mc, t](const Vec2& x) { return mc.temperature(x, t); }; };
  auto G_of = [&](double t) { return [&mc, t](const Vec2& x) { return mc.gradient(x, t); }; };

  const auto mesh = BackgroundMesh::build_structured(mc.domain, options.cells, options.cells);
  const auto phi0 = LevelSetField::interpolate(mesh, [&](const Vec2& x) { return mc.level_set(x, options.t0); });
  Simulation sim(mc.problem(options.dt, options.t0, options.tf, options.nitsche), phi0, options.simulation);
  sim.set_observer([&](const StepView& v) {
    StepErrors e;
    e.step = static_cast<int>(run.report.steps.size());
    e.t = v.t_n;
    e.T = error_norms(v.T_n, T_of(v.t_n), G_of(v.t_n), v.geometry);
    const BackgroundMesh& m = *v.geometry.mesh;
    const double speed = ManufacturedCase::normal_speed(v.t_next);
    const double R = ManufacturedCase::radius(v.t_n);
    e.velocity = interface_error(
        v.geometry,
        [&](int cell, const Vec2& x) { return v.v_n.value(cell, P1Element(m.cell_vertices(cell)).barycentric(x)); },
        [speed](const Vec2&) { return speed; });
    e.radius = interface_error(v.geometry, [](int, const Vec2& x) { return x.norm(); },
                               [R](const Vec2&) { return R; });
    const InterfaceAverages avg = interface_averages(v.geometry, v.v_n);
    e.v_avg = avg.v_avg;
    e.v_exact = speed;
    e.r_avg = avg.r_avg;
    e.r_exact = R;
    run.report.steps.push_back(e);
  });

  try {
    while (!sim.finished()) run.records.push_back(sim.step());
    const double t = sim.state().t;
    run.report.final_t = t;
    run.report.final_T = error_norms(sim.temperature(), T_of(t), G_of(t), sim.geometry());
  } catch (const Error& e) {
    run.failed = true;
    run.message = e.what();
  }
  run.final_state = sim.state();
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

double fit_order(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("fit_order: size mismatch");
  const std::size_t n = x.size();
  const std::size_t first = n > 3 ? n - 3 : 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = first; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  const double den = m * sxx - sx * sx;
  if (m < 2 || den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (m * sxy - sx * sy) / den;
}

double ConvergenceTable::order(const std::string& name) const {
  for (const auto& [n, v] : orders) {
    if (n == name) return v;
  }
  throw ConfigError("unknown error column " + name);
}

namespace {

const char* const kColumns[] = {"T_L2", "T_H1", "T_L2_gamma", "v_L2_gamma", "r_L2_gamma", "T_L2_final"};

std::array<double, 6> columns(const ManufacturedRun& r) {
  const ErrorAggregate a = r.report.aggregate();
  return {a.T_l2, a.T_h1, a.T_gamma, a.velocity, a.radius, r.report.final_T.l2.value};
}

} // namespace

void ConvergenceTable::write_csv(std::ostream& out) const {
  out.precision(10);
  out << "h,dt";
  for (const char* c : kColumns) out << ',' << c;
  out << ",max_r_dev,steps,status\n";
  for (const ManufacturedRun& r : runs) {
    out << r.h << ',' << r.options.dt;
    if (r.failed) {
      for (std::size_t i = 0; i < std::size(kColumns) + 1; ++i) out << ',';
      out << ',' << r.records.size() << ",\"failed: ";
      for (char ch : r.message) out << (ch == '"' ? '\'' : ch);
      out << "\"\n";
      continue;
    }
    for (double v : columns(r)) out << ',' << v;
    out << ',' << r.report.aggregate().max_radius_deviation << ',' << r.records.size() << ",ok\n";
  }
  out << (axis == StudyAxis::Space ? "order_h," : "order_dt,");
  for (const auto& [n, v] : orders) out << ',' << v;
  out << ",,,\n";
}

ConvergenceTable convergence_study(const std::vector<ManufacturedRunOptions>& configs, StudyAxis axis,
                                   const ManufacturedCase& mc) {
  if (configs.empty()) throw ConfigError("convergence study needs at least one run");
  std::vector<ManufacturedRun> runs;
  for (const ManufacturedRunOptions& c : configs) runs.push_back(run_manufactured(c, mc));
  return tabulate(std::move(runs), axis);
}

ConvergenceTable tabulate(std::vector<ManufacturedRun> runs, StudyAxis axis) {
  ConvergenceTable table;
  table.axis = axis;
  table.runs = std::move(runs);
  std::vector<double> x;
  std::vector<std::array<double, 6>> cols;
  for (const ManufacturedRun& r : table.runs) {
    if (r.failed) continue;
    x.push_back(axis == StudyAxis::Space ? r.h : r.options.dt);
    cols.push_back(columns(r));
  }
  for (std::size_t k = 0; k < std::size(kColumns); ++k) {
    std::vector<double> y;
    for (const auto& c : cols) y.push_back(c[k]);
    table.orders.emplace_back(kColumns[k], x.size() >= 2 ? fit_order(x, y)
                                                          : std::numeric_limits<double>::quiet_NaN());
  }
  return table;
}

double final_difference(const StefanState& a, const StefanState& b, const ManufacturedCase& mc) {
  const MeshPtr& mesh = a.phi.mesh();
  if (b.phi.mesh()->n_vertices() != mesh->n_vertices()) throw ConfigError("states live on different meshes");
  const CutGeometry g = build_cut_geometry(a.phi);
  const auto rule = triangle_rule(4);
  double diff = 0.0, norm = 0.0;
  for (const SubTriangle& st : g.physical_subtris) {
    const auto& v = mesh->triangles()[st.parent];
    bool both = true;
    for (int k = 0; k < 3; ++k) both = both && a.T.defined[v[k]] && b.T.defined[v[k]];
    const P1Element el(mesh->cell_vertices(st.parent));
    const double area = st.area();
    for (const auto& q : rule) {
      const Vec2 x = q.l0 * st.vertices[0] + q.l1 * st.vertices[1] + q.l2 * st.vertices[2];
      const double ex = mc.temperature(x, a.t);
      norm += q.w * area * ex * ex;
      if (!both) continue;
      const Vec3 l = el.barycentric(x);
      double d = 0.0;
      for (int k = 0; k < 3; ++k) d += l[k] * (a.T.values[v[k]] - b.T.values[v[k]]);
      diff += q.w * area * d * d;
    }
  }
  return std::sqrt(diff / norm);
}

double flat_cut_condition_number(double offset, const FlatCutOptions& o) {
  if (o.cells < 2 || o.cells % 2) throw ConfigError("flat cut study needs an even cell count");
  const auto mesh = BackgroundMesh::build_structured({{0.0, 0.0}, {1.0, 1.0}}, o.cells, o.cells);
  const double y0 = 0.5 + offset / o.cells;
  const auto phi = LevelSetField::interpolate(mesh, [&](const Vec2& x) { return x.y() - y0; });
  CutOptions co;
  co.boundary[static_cast<int>(Side::Bottom)] = BoundaryKind::Dirichlet;
  const CutGeometry g = build_cut_geometry(phi, co);
  const auto V = FunctionSpace::p1_active(g);
  const double h = mesh->h_max();

  SystemBuilder b(V->n_dofs());
  assemble_bulk(g, *V, {0.0, 1.0}, b);
  InterfaceKernel nitsche;
  nitsche.bilinear = [&](const InterfacePoint& p, int i, int j) {
    return p.weight * (o.gamma / h * p.shape[i] * p.shape[j] - p.dn[j] * p.shape[i] - p.shape[j] * p.dn[i]);
  };
  assemble_interface(g, *V, nitsche, b);
  assemble_nitsche_dirichlet(g, *V, 1.0, o.gamma, [](const Vec2&) { return 0.0; }, b);
  if (o.gamma_ghost > 0.0) assemble_ghost_penalty(g, *V, o.gamma_ghost * h, b);

  const Eigen::MatrixXd A(b.matrix());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = eig.eigenvalues().cwiseAbs();
  return ev.maxCoeff() / ev.minCoeff();
}

double condition_spread(const std::vector<double>& offsets, const FlatCutOptions& o) {
  if (offsets.empty()) throw ConfigError("condition sweep needs offsets");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double d : offsets) {
    const double c = flat_cut_condition_number(d, o);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return hi / lo;
}

} // namespace cutstefan
