#include "cutstefan/element.hpp"
#include "cutstefan/fem.hpp"
#include "cutstefan/levelset.hpp"
#include "cutstefan/quadrature.hpp"

namespace cutstefan {

struct NormalProjector::Impl {
  SpacePtr space;
  SpdSolver mass;

  explicit Impl(const SpacePtr& s) : space(s), mass(mass_matrix(*s)) {}

  static Eigen::SparseMatrix<double, Eigen::RowMajor> mass_matrix(const FunctionSpace& s) {
    SystemBuilder b(s.n_scalar_dofs());
    assemble_cell_mass(s, 1.0, b);
    return b.matrix();
  }
};

NormalProjector::NormalProjector(MeshPtr mesh)
    : mesh_(std::move(mesh)),
      impl_(std::make_unique<Impl>(FunctionSpace::p1_background(mesh_))) {}

NormalProjector::~NormalProjector() = default;
NormalProjector::NormalProjector(NormalProjector&&) noexcept = default;
NormalProjector& NormalProjector::operator=(NormalProjector&&) noexcept = default;

NormalField NormalProjector::project(const LevelSetField& phi) const {
  if (phi.mesh() != mesh_) throw AssemblyError("level set lives on a different mesh");
  const BackgroundMesh& mesh = *mesh_;
  const auto rule = triangle_rule(4);
  Eigen::VectorXd bx = Eigen::VectorXd::Zero(mesh.n_vertices());
  Eigen::VectorXd by = Eigen::VectorXd::Zero(mesh.n_vertices());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const P1Element el(mesh.cell_vertices(c));
    const auto& t = mesh.triangles()[c];
    for (const auto& q : rule) {
      const Vec3 l(q.l0, q.l1, q.l2);
      const Vec2 g = phi.gradient(c, l);
      const Vec2 u = g / std::max(g.norm(), kGradientFloor);
      const double w = q.w * el.area;
      for (int i = 0; i < 3; ++i) {
        bx[t[i]] += w * l[i] * u.x();
        by[t[i]] += w * l[i] * u.y();
      }
    }
  }
  NormalField n;
  n.mesh = mesh_;
  n.nx = impl_->mass.solve(bx);
  n.ny = impl_->mass.solve(by);
  return n;
}

NormalField project_normal(const LevelSetField& phi) { return NormalProjector(phi.mesh()).project(phi); }

} // namespace cutstefan
