#include "cutstefan/interface_velocity.hpp"

#include "cutstefan/element.hpp"
#include "cutstefan/fast_marching.hpp"
#include "cutstefan/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace cutstefan {

FeField smooth_gradient(const FeField& T, const CutGeometry& geometry, double gamma_GT) {
  const SpacePtr& V = T.space;
  if (!V || V->kind() == SpaceKind::P2Background || V->components() != 1) {
    throw AssemblyError("smooth_gradient needs a scalar P1 temperature");
  }
  if (geometry.physical_subtris.empty()) throw GeometryError("smooth_gradient: empty material domain");
  const BackgroundMesh& mesh = *V->mesh();
  const int n = V->n_dofs();

  SystemBuilder b(n);
  assemble_bulk(geometry, *V, {1.0, 0.0}, b);
  assemble_ghost_penalty(geometry, *V, gamma_GT * mesh.h_max(), b);
  SparseSystem sys = b.build();

  Eigen::VectorXd rx = Eigen::VectorXd::Zero(n), ry = Eigen::VectorXd::Zero(n);
  int current = -1;
  P1Element el;
  std::array<int, 3> d{};
  Vec2 g = Vec2::Zero();
  for (const SubTriangle& st : geometry.physical_subtris) {
    if (st.parent != current) {
      current = st.parent;
      el = P1Element(mesh.cell_vertices(current));
      d = V->p1_dofs(current);
      g = T.gradient(current, Vec3(1.0 / 3, 1.0 / 3, 1.0 / 3));
    }
    const Vec3 l = el.barycentric((st.vertices[0] + st.vertices[1] + st.vertices[2]) / 3.0);
    const double a = st.area();
    for (int i = 0; i < 3; ++i) {
      rx[d[i]] += a * l[i] * g.x();
      ry[d[i]] += a * l[i] * g.y();
    }
  }

  const SpdSolver solver(sys.matrix);
  Eigen::VectorXd out(2 * n);
  out.head(n) = solver.solve(rx);
  out.tail(n) = solver.solve(ry);
  return FeField(FunctionSpace::p1_active(geometry, 2), std::move(out));
}

namespace {

Vec2 unit(const Vec2& n) { return n / std::max(n.norm(), kGradientFloor); }

/// P_gamma of T at x in cell, with the given unit normal and beam angle normal.
double p_gamma_at(const FeField& T, int cell, const Vec3& l, const Vec2& x, const Vec2& n,
                  const Vec2& angle_normal, const ProblemSpec& spec, double gamma, double t) {
  const double Tv = T.value(cell, l);
  const double dTdn = T.gradient(cell, l).dot(n);
  const double In = spec.beam ? spec.beam->flux(x, t, angle_normal).dot(n) : 0.0;
  return p_gamma(Tv, dTdn, In, spec.material.k, spec.material.T_m, gamma);
}

class InterfaceGate {
public:
  InterfaceGate(const FeField& T, const NormalField& normal, const CutGeometry& g,
                const ProblemSpec& spec, double gamma, double t)
      : T_(T), normal_(normal), g_(g), spec_(spec), gamma_(gamma), t_(t),
        locator_(g.interface_segments, g.mesh->domain(), g.mesh->h_max()) {
    const BackgroundMesh& mesh = *g.mesh;
    cell_gate_.assign(mesh.n_cells(), -1);
    std::deque<int> queue;
    for (int c : g.cut_cells) {
      const auto v = mesh.cell_vertices(c);
      cell_gate_[c] = at((v[0] + v[1] + v[2]) / 3.0);
      queue.push_back(c);
    }
    while (!queue.empty()) {
      const int c = queue.front();
      queue.pop_front();
      for (int nb : mesh.cell_neighbors(c)) {
        if (nb < 0 || !g.is_active(nb) || cell_gate_[nb] >= 0) continue;
        cell_gate_[nb] = cell_gate_[c];
        queue.push_back(nb);
      }
    }
  }

  int at(const Vec2& x) const {
    if (locator_.empty()) return 0;
    const ClosestPoint cp = locator_.closest(x);
    const InterfaceSegment& seg = g_.interface_segments[cp.segment];
    const P1Element el(g_.mesh->cell_vertices(seg.parent));
    const Vec3 l = el.barycentric(cp.point);
    const double P = p_gamma_at(T_, seg.parent, l, cp.point, seg.normal, normal_.value(seg.parent, l),
                                spec_, gamma_, t_);
    return P > 0.0 ? 1 : 0;
  }

  int at(int cell, const Vec2& x) const {
    if (g_.location[cell] == CellLocation::Cut) return at(x);
    return std::max(cell_gate_[cell], 0);
  }

private:
  const FeField& T_;
  const NormalField& normal_;
  const CutGeometry& g_;
  const ProblemSpec& spec_;
  double gamma_;
  double t_;
  SegmentLocator locator_;
  std::vector<int> cell_gate_;
};

} // namespace

FeField normal_velocity(const FeField& T, const FeField& G_T, const NormalField& normal,
                        const CutGeometry& geometry, const ProblemSpec& spec, double t,
                        const VelocityOptions& options) {
  const SpacePtr& V = T.space;
  if (!V || V->kind() != SpaceKind::P1Active || V->components() != 1) {
    throw AssemblyError("normal_velocity needs T on the scalar active P1 space");
  }
  if (!G_T.space || G_T.space->components() != 2 || G_T.space->n_scalar_dofs() != V->n_dofs()) {
    throw AssemblyError("normal_velocity: smoothed gradient does not match the temperature space");
  }
  const BackgroundMesh& mesh = *V->mesh();
  const double gamma = spec.nitsche.gamma(mesh.h_max());
  const double k = spec.material.k;
  const double rhoL = spec.material.rho * spec.material.L;
  const int n = V->n_dofs();

  std::unique_ptr<InterfaceGate> gate;
  if (options.gate == VelocityGate::ClosestInterfacePoint) {
    gate = std::make_unique<InterfaceGate>(T, normal, geometry, spec, gamma, t);
  }

  SystemBuilder b(n);
  assemble_cell_mass(*V, 1.0, b);
  Eigen::VectorXd& rhs = b.rhs();
  const auto rule = triangle_rule(options.quadrature_degree);
  for (int c : geometry.active_cells) {
    const P1Element el(mesh.cell_vertices(c));
    const auto d = V->p1_dofs(c);
    const double area = el.area;
    for (const auto& q : rule) {
      const Vec3 l(q.l0, q.l1, q.l2);
      const Vec2 x = el.point(l);
      const Vec2 nq = unit(normal.value(c, l));
      int H = 0;
      if (gate) {
        H = gate->at(c, x);
      } else {
        H = p_gamma_at(T, c, l, x, nq, nq, spec, gamma, t) > 0.0 ? 1 : 0;
      }
      if (H == 0) continue;
      const Vec2 G(G_T.value(c, l, 0), G_T.value(c, l, 1));
      const Vec2 I = spec.beam ? spec.beam->flux(x, t, nq) : Vec2::Zero();
      const double val = (k * G - I).dot(nq) / rhoL * q.w * area;
      for (int i = 0; i < 3; ++i) rhs[d[i]] += val * l[i];
    }
  }

  if (spec.nitsche.theta1 != 0) {
    const double coef = spec.nitsche.theta1 / (gamma * rhoL);
    for_each_interface_point(geometry, *V, 3, [&](const InterfacePoint& p) {
      const Vec3 l(p.shape[0], p.shape[1], p.shape[2]);
      int H = 0;
      if (gate) {
        H = gate->at(p.x);
      } else {
        H = p_gamma_at(T, p.cell, l, p.x, p.normal, normal.value(p.cell, l), spec, gamma, t) > 0.0;
      }
      if (H == 0) return;
      const double val = coef * (T.value(p.cell, l) - spec.material.T_m) * p.weight;
      for (int i = 0; i < 3; ++i) rhs[p.dofs[i]] -= val * p.shape[i];
    });
  }

  return FeField(V, solve_sparse(b.build(), SolverKind::SymmetricPositive));
}

FeField fast_march_extend(const FeField& v_n, const CutGeometry& geometry, double band_factor,
                          std::vector<char>* reached, bool* monotone) {
  if (geometry.interface_segments.empty()) throw GeometryError("velocity extension: empty interface");
  if (!v_n.space || v_n.space->components() != 1 || v_n.space->kind() == SpaceKind::P2Background) {
    throw AssemblyError("velocity extension needs a scalar P1 field");
  }
  const BackgroundMesh& mesh = *geometry.mesh;
  const SegmentLocator locator(geometry.interface_segments, mesh.domain(), mesh.h_max());

  std::vector<char> seeded(mesh.n_vertices(), 0);
  std::vector<MarchSeed> seeds;
  for (int c : geometry.cut_cells) {
    for (int v : mesh.triangles()[c]) {
      if (seeded[v]) continue;
      seeded[v] = 1;
      const ClosestPoint cp = locator.closest(mesh.vertex(v));
      const int parent = geometry.interface_segments[cp.segment].parent;
      const Vec3 l = P1Element(mesh.cell_vertices(parent)).barycentric(cp.point);
      seeds.push_back({v, cp.distance, v_n.value(parent, l)});
    }
  }

  const FastMarcher marcher(mesh.vertices(), mesh.triangles());
  const MarchResult r = marcher.march(seeds, band_factor * mesh.h_max());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (r.reached[v]) c[v] = r.value[v];
  }
  if (reached) *reached = r.reached;
  if (monotone) *monotone = r.monotone;
  if (!r.monotone) throw GeometryError("velocity extension: fast marching lost monotonicity");
  return FeField(FunctionSpace::p1_background(geometry.mesh), std::move(c));
}

FeField vectorize(const FeField& vn_ext, const NormalField& normal) {
  const FunctionSpace& V = *vn_ext.space;
  if (V.kind() != SpaceKind::P1Background || V.components() != 1) {
    throw AssemblyError("vectorize needs a scalar background P1 field");
  }
  const int n = V.n_dofs();
  Eigen::VectorXd c(2 * n);
  c.head(n) = vn_ext.coeffs.cwiseProduct(normal.nx);
  c.tail(n) = vn_ext.coeffs.cwiseProduct(normal.ny);
  return FeField(FunctionSpace::p1_background(V.mesh(), 2), std::move(c));
}

VelocityField extend_velocity(const FeField& v_n, const CutGeometry& geometry,
                              const NormalField& normal, double band_factor) {
  VelocityField out;
  out.vn_ext = fast_march_extend(v_n, geometry, band_factor, &out.reached, &out.monotone);
  out.v_ext = vectorize(out.vn_ext, normal);
  return out;
}

} // namespace cutstefan
