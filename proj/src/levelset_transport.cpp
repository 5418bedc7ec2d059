#include "cutstefan/levelset_transport.hpp"

#include "cutstefan/element.hpp"
#include "cutstefan/log.hpp"
#include "cutstefan/quadrature.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cutstefan {

void TransportParams::validate() const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("transport theta must lie in [0, 1]");
  if (!(dt > 0.0)) throw ConfigError("transport dt must be positive");
  if (quadrature_degree < 1 || quadrature_degree > 5) {
    throw ConfigError("transport quadrature degree must be in 1..5");
  }
}

double tau_sd(const Vec2& v, double dt, double h) {
  return 2.0 / std::sqrt(1.0 / (dt * dt) + v.squaredNorm() / (h * h));
}

using RowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Advector::Impl {
  RowMat pattern;
  std::vector<std::array<int, 36>> slots;
};

Advector::Advector(MeshPtr mesh) : mesh_(std::move(mesh)), impl_(std::make_unique<Impl>()) {
  const int n = mesh_->n_p2_nodes();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh_->n_cells()) * 36);
  for (int c = 0; c < mesh_->n_cells(); ++c) {
    const auto nodes = mesh_->p2_nodes(c);
    for (int i : nodes)
      for (int j : nodes) trip.emplace_back(i, j, 0.0);
  }
  RowMat& P = impl_->pattern;
  P.resize(n, n);
  P.setFromTriplets(trip.begin(), trip.end());
  P.makeCompressed();
  impl_->slots.resize(mesh_->n_cells());
  const int* outer = P.outerIndexPtr();
  const int* inner = P.innerIndexPtr();
  for (int c = 0; c < mesh_->n_cells(); ++c) {
    const auto nodes = mesh_->p2_nodes(c);
    for (int a = 0; a < 6; ++a) {
      const int* begin = inner + outer[nodes[a]];
      const int* end = inner + outer[nodes[a] + 1];
      for (int b = 0; b < 6; ++b) {
        impl_->slots[c][a * 6 + b] = static_cast<int>(std::lower_bound(begin, end, nodes[b]) - inner);
      }
    }
  }
}

Advector::~Advector() = default;
Advector::Advector(Advector&&) noexcept = default;
Advector& Advector::operator=(Advector&&) noexcept = default;

namespace {

void check_velocity(const FeField& v, const BackgroundMesh& mesh, const char* name) {
  if (!v.space || v.space->kind() != SpaceKind::P1Background || v.space->components() != 2 ||
      v.space->mesh().get() != &mesh) {
    throw AssemblyError(std::string("advect: ") + name + " must be a vector P1 field on the background mesh");
  }
}

} // namespace

LevelSetField Advector::advect(const LevelSetField& phi_n, const FeField& v_n,
                               const FeField& v_np1, const TransportParams& params,
                               TransportReport* report) const {
  params.validate();
  const BackgroundMesh& mesh = *mesh_;
  if (phi_n.mesh().get() != &mesh) throw AssemblyError("advect: level set lives on another mesh");
  check_velocity(v_n, mesh, "v_n");
  check_velocity(v_np1, mesh, "v_np1");

  const double dt = params.dt, th = params.theta;
  const auto rule = triangle_rule(params.quadrature_degree);
  const Eigen::VectorXd& phi = phi_n.coefficients();
  RowMat A = impl_->pattern;
  double* val = A.valuePtr();
  std::fill(val, val + A.nonZeros(), 0.0);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(A.rows());
  double cfl = 0.0;

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const P1Element el(mesh.cell_vertices(c));
    const auto nodes = mesh.p2_nodes(c);
    const double h = mesh.cell_diameter(c);
    const auto& slot = impl_->slots[c];
    std::array<double, 6> ph{};
    for (int a = 0; a < 6; ++a) ph[a] = phi[nodes[a]];
    for (const auto& q : rule) {
      const Vec3 l(q.l0, q.l1, q.l2);
      const auto N = p2_values(l);
      const auto G = p2_gradients(l, el.grad);
      const Vec2 v0(v_n.value(c, l, 0), v_n.value(c, l, 1));
      const Vec2 v1(v_np1.value(c, l, 0), v_np1.value(c, l, 1));
      cfl = std::max(cfl, std::max(v0.norm(), v1.norm()) * dt / h);
      const double tau = tau_sd(v1, dt, h);
      const double w = q.w * el.area;
      double phq = 0.0;
      Vec2 gphq = Vec2::Zero();
      for (int a = 0; a < 6; ++a) {
        phq += ph[a] * N[a];
        gphq += ph[a] * G[a];
      }
      const double explicit_part = phq / dt - (1.0 - th) * v0.dot(gphq);
      std::array<double, 6> test{}, trial{};
      for (int a = 0; a < 6; ++a) {
        test[a] = N[a] + tau * v1.dot(G[a]);
        trial[a] = N[a] / dt + th * v1.dot(G[a]);
      }
      for (int a = 0; a < 6; ++a) {
        rhs[nodes[a]] += w * explicit_part * test[a];
        for (int b = 0; b < 6; ++b) val[slot[a * 6 + b]] += w * trial[b] * test[a];
      }
    }
  }
  if (!rhs.allFinite()) throw AssemblyError("advect: non-finite right-hand side");
  if (cfl > kCflWarning) {
    std::ostringstream m;
    m << "level-set transport CFL number " << cfl << " exceeds " << kCflWarning;
    log_warning(m.str());
  }

  SolveReport rep;
  Eigen::VectorXd x;
  {
    Eigen::BiCGSTAB<RowMat, Eigen::DiagonalPreconditioner<double>> it;
    it.setTolerance(1e-13);
    it.compute(A);
    x = it.solveWithGuess(rhs, phi);
    const double res = (A * x - rhs).norm();
    const double bound = kSolveTolerance * (rhs.norm() + A.norm() * x.norm());
    rep = {SolverKind::Iterative, static_cast<int>(it.iterations()), res, bound};
    if (!(res <= bound) || !x.allFinite()) {
      x = solve_sparse({A, rhs}, SolverKind::Direct, &rep);
    }
  }
  if (report) *report = {cfl, rep};
  return LevelSetField(phi_n.mesh(), std::move(x));
}

LevelSetField advect(const LevelSetField& phi_n, const FeField& v_n, const FeField& v_np1,
                     const TransportParams& params, TransportReport* report) {
  return Advector(phi_n.mesh()).advect(phi_n, v_n, v_np1, params, report);
}

} // namespace cutstefan
