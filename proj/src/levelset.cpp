#include "cutstefan/levelset.hpp"

#include "cutstefan/element.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

namespace cutstefan {

LevelSetField::LevelSetField(MeshPtr mesh, Eigen::VectorXd coefficients)
    : mesh_(std::move(mesh)), coeffs_(std::move(coefficients)) {
  if (!mesh_) throw Error("level set needs a mesh");
  if (coeffs_.size() != mesh_->n_p2_nodes()) {
    throw Error("level set has " + std::to_string(coeffs_.size()) + " coefficients, expected " +
                std::to_string(mesh_->n_p2_nodes()));
  }
}

LevelSetField LevelSetField::interpolate(MeshPtr mesh,
                                         const std::function<double(const Vec2&)>& phi) {
  Eigen::VectorXd c(mesh->n_p2_nodes());
  for (int i = 0; i < c.size(); ++i) c[i] = phi(mesh->p2_node_position(i));
  return LevelSetField(std::move(mesh), std::move(c));
}

double LevelSetField::value(int cell, const Vec3& bary) const {
  const auto nodes = mesh_->p2_nodes(cell);
  const auto N = p2_values(bary);
  double v = 0.0;
  for (int i = 0; i < 6; ++i) v += N[i] * coeffs_[nodes[i]];
  return v;
}

Vec2 LevelSetField::gradient(int cell, const Vec3& bary) const {
  const P1Element el(mesh_->cell_vertices(cell));
  const auto nodes = mesh_->p2_nodes(cell);
  const auto G = p2_gradients(bary, el.grad);
  Vec2 g = Vec2::Zero();
  for (int i = 0; i < 6; ++i) g += coeffs_[nodes[i]] * G[i];
  return g;
}

double LevelSetField::value_at(const Vec2& x) const {
  const int cell = mesh_->locate(x);
  if (cell < 0) return std::numeric_limits<double>::quiet_NaN();
  const P1Element el(mesh_->cell_vertices(cell));
  return value(cell, el.barycentric(x));
}

Eigen::VectorXd interpolate_to_refined_linear(const LevelSetField& phi) {
  // Refined vertices are exactly the P2 nodes, where the quadratic field
  // takes its nodal coefficient.
  return phi.coefficients();
}

double CutGeometry::physical_area() const {
  double a = 0.0;
  for (const auto& t : physical_subtris) a += t.area();
  return a;
}

double CutGeometry::interface_length() const {
  double l = 0.0;
  for (const auto& s : interface_segments) l += s.length();
  return l;
}

namespace {

enum class ChildState : std::uint8_t { Outside, Inside, Mixed };

struct ChildValues {
  std::array<double, 3> v;
  int neg = 0;
  int pos = 0;
};

ChildValues child_values(const RefinedMesh& refined, const Eigen::VectorXd& phi, int child,
                         double snap) {
  ChildValues cv;
  const auto& tri = refined.triangles[child];
  for (int k = 0; k < 3; ++k) {
    double v = phi[tri[k]];
    if (std::abs(v) < snap) v = 0.0;
    cv.v[k] = v;
    if (v < 0.0) ++cv.neg;
    if (v > 0.0) ++cv.pos;
  }
  return cv;
}

ChildState classify(const ChildValues& cv) {
  if (cv.pos == 0) return ChildState::Inside;
  if (cv.neg == 0) return ChildState::Outside;
  return ChildState::Mixed;
}

Vec2 oriented_normal(const Vec2& a, const Vec2& b, const Vec2& toward_positive) {
  const Vec2 d = b - a;
  Vec2 n(d.y(), -d.x());
  n.normalize();
  if (n.dot(toward_positive) < 0.0) n = -n;
  return n;
}

void push_polygon(std::vector<SubTriangle>& out, int parent, const std::array<Vec2, 4>& q, int n) {
  if (n == 3) {
    out.push_back({parent, {q[0], q[1], q[2]}});
    return;
  }
  if ((q[0] - q[2]).squaredNorm() <= (q[1] - q[3]).squaredNorm()) {
    out.push_back({parent, {q[0], q[1], q[2]}});
    out.push_back({parent, {q[0], q[2], q[3]}});
  } else {
    out.push_back({parent, {q[1], q[2], q[3]}});
    out.push_back({parent, {q[1], q[3], q[0]}});
  }
}

} // namespace

CutGeometry build_cut_geometry(const LevelSetField& phi, const CutOptions& options) {
  const BackgroundMesh& mesh = *phi.mesh();
  const RefinedMesh& refined = mesh.refined();
  const Eigen::VectorXd& values = phi.coefficients();
  const double snap = options.snap_factor * mesh.h_max();

  for (int i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw GeometryError("level set coefficient " + std::to_string(i) + " is not finite");
    }
  }

  const int n_children = static_cast<int>(refined.triangles.size());
  std::vector<ChildState> state(n_children);
  for (int ch = 0; ch < n_children; ++ch) {
    state[ch] = classify(child_values(refined, values, ch, snap));
  }

  CutGeometry g;
  g.mesh = phi.mesh();
  g.location.assign(mesh.n_cells(), CellLocation::Outside);
  g.active.assign(mesh.n_cells(), 0);

  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    double area = 0.0;
    bool has_segment = false;
    for (int ch = 4 * cell; ch < 4 * cell + 4; ++ch) {
      if (state[ch] == ChildState::Outside) continue;
      const auto& tri = refined.triangles[ch];
      const ChildValues cv = child_values(refined, values, ch, snap);
      const std::array<Vec2, 3> x{refined.vertices[tri[0]], refined.vertices[tri[1]],
                                  refined.vertices[tri[2]]};
      const P1Element child(x);
      const Vec2 grad = cv.v[0] * child.grad[0] + cv.v[1] * child.grad[1] + cv.v[2] * child.grad[2];
      const std::size_t first_subtri = g.physical_subtris.size();

      if (state[ch] == ChildState::Inside) {
        g.physical_subtris.push_back({cell, x});
        // The interface can run exactly along a child edge whose nodes were
        // snapped to zero; it belongs to the inside child.
        for (int k = 0; k < 3; ++k) {
          const int a = (k + 1) % 3;
          const int b = (k + 2) % 3;
          if (cv.v[a] != 0.0 || cv.v[b] != 0.0) continue;
          const int nb = refined.topology.neighbors[ch][k];
          if (nb < 0 || state[nb] != ChildState::Outside) continue;
          const Vec2 outward = x[a] - x[k] + (x[b] - x[a]) * 0.5;
          g.interface_segments.push_back({cell, x[a], x[b], oriented_normal(x[a], x[b], outward)});
          has_segment = true;
        }
      } else {
        std::array<Vec2, 4> poly;
        int n_poly = 0;
        std::array<Vec2, 2> zeros;
        int n_zero = 0;
        for (int k = 0; k < 3; ++k) {
          const int k1 = (k + 1) % 3;
          if (cv.v[k] <= 0.0) poly[n_poly++] = x[k];
          if (cv.v[k] == 0.0 && n_zero < 2) zeros[n_zero++] = x[k];
          if ((cv.v[k] < 0.0 && cv.v[k1] > 0.0) || (cv.v[k] > 0.0 && cv.v[k1] < 0.0)) {
            const double s = cv.v[k] / (cv.v[k] - cv.v[k1]);
            const Vec2 p = x[k] + s * (x[k1] - x[k]);
            poly[n_poly++] = p;
            if (n_zero < 2) zeros[n_zero++] = p;
          }
        }
        if (n_zero != 2 || n_poly < 3) {
          throw GeometryError("inconsistent cut of refined triangle " + std::to_string(ch));
        }
        push_polygon(g.physical_subtris, cell, poly, n_poly);
        g.interface_segments.push_back(
            {cell, zeros[0], zeros[1], oriented_normal(zeros[0], zeros[1], grad)});
        has_segment = true;
      }
      for (std::size_t t = first_subtri; t < g.physical_subtris.size(); ++t) {
        area += g.physical_subtris[t].area();
      }

      // Exterior boundary pieces of this child where the interpolant is <= 0.
      for (int k = 0; k < 3; ++k) {
        if (refined.topology.neighbors[ch][k] >= 0) continue;
        const int a = (k + 1) % 3;
        const int b = (k + 2) % 3;
        const double va = cv.v[a];
        const double vb = cv.v[b];
        Vec2 pa = x[a];
        Vec2 pb = x[b];
        if (va > 0.0 && vb > 0.0) continue;
        if (va > 0.0) pa = x[a] + va / (va - vb) * (x[b] - x[a]);
        if (vb > 0.0) pb = x[a] + va / (va - vb) * (x[b] - x[a]);
        if ((pb - pa).squaredNorm() == 0.0) continue;
        const Face& rf = refined.topology.faces[refined.topology.cell_faces[ch][k]];
        const Side side = mesh.side_of(0.5 * (x[a] + x[b]));
        BoundaryFacet facet{cell, pa, pb, rf.normal, side};
        const bool dirichlet = side != Side::None &&
                               options.boundary[static_cast<int>(side)] == BoundaryKind::Dirichlet;
        (dirichlet ? g.dirichlet_facets : g.neumann_facets).push_back(facet);
      }
    }
    if (area > 0.0) {
      g.active[cell] = 1;
      g.active_cells.push_back(cell);
      if (has_segment) {
        g.location[cell] = CellLocation::Cut;
        g.cut_cells.push_back(cell);
      } else {
        g.location[cell] = CellLocation::Inside;
        g.inside_cells.push_back(cell);
      }
    }
  }

  if (g.active_cells.empty()) {
    throw GeometryError("empty domain: the level set leaves no material in the background mesh");
  }

  for (int f : mesh.interior_faces()) {
    const Face& face = mesh.faces()[f];
    const int a = face.cells[0];
    const int b = face.cells[1];
    if (!g.active[a] || !g.active[b]) continue;
    if (g.location[a] == CellLocation::Cut || g.location[b] == CellLocation::Cut) {
      g.ghost_faces.push_back(f);
    }
  }
  return g;
}

int g3_walk_length(const CutGeometry& geometry) {
  const BackgroundMesh& mesh = *geometry.mesh;
  std::vector<int> dist(mesh.n_cells(), -1);
  std::deque<int> queue;
  for (int c : geometry.inside_cells) {
    dist[c] = 0;
    queue.push_back(c);
  }
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    for (int nb : mesh.cell_neighbors(c)) {
      if (nb < 0 || !geometry.is_active(nb) || dist[nb] >= 0) continue;
      dist[nb] = dist[c] + 1;
      queue.push_back(nb);
    }
  }
  int worst = 0;
  for (int c : geometry.cut_cells) {
    if (dist[c] < 0) return -1;
    worst = std::max(worst, dist[c]);
  }
  return worst;
}

Vec2 NormalField::value(int cell, const Vec3& bary) const {
  const auto& t = mesh->triangles()[cell];
  Vec2 n = Vec2::Zero();
  for (int i = 0; i < 3; ++i) n += bary[i] * Vec2(nx[t[i]], ny[t[i]]);
  return n;
}

double distance_defect(const LevelSetField& phi, const CutGeometry& geometry) {
  double worst = 0.0;
  const Vec3 mid(1.0 / 3, 1.0 / 3, 1.0 / 3);
  for (int c : geometry.cut_cells) {
    worst = std::max(worst, std::abs(phi.gradient(c, mid).norm() - 1.0));
  }
  return worst;
}

bool needs_redistance(const LevelSetField& phi, const CutGeometry& geometry) {
  return distance_defect(phi, geometry) > kRedistanceThreshold;
}

} // namespace cutstefan
