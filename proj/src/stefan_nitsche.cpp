#include "cutstefan/stefan_nitsche.hpp"

#include "cutstefan/log.hpp"
#include "cutstefan/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace cutstefan {

void MaterialParams::validate() const {
  if (!(rho > 0.0) || !(c > 0.0) || !(k > 0.0) || !(L > 0.0)) {
    throw ConfigError("material parameters rho, c, k, L must be positive");
  }
  if (!std::isfinite(T_m)) throw ConfigError("melting temperature must be finite");
}

void NitscheParams::validate() const {
  if (theta1 != 0 && theta1 != 1) throw ConfigError("theta1 must be 0 or 1");
  if (theta2 < -1 || theta2 > 1) throw ConfigError("theta2 must be -1, 0 or 1");
  if (!(gamma_hat > 0.0) || !(gamma_T > 0.0) || !(gamma_b > 0.0) || !(gamma_GT > 0.0)) {
    throw ConfigError("Nitsche penalties gamma_hat, gamma_T, gamma_b, gamma_GT must be positive");
  }
}

void ProblemSpec::validate() const {
  material.validate();
  nitsche.validate();
  if (!(dt > 0.0)) throw ConfigError("time step dt must be positive");
  if (!(t0 <= tf)) throw ConfigError("need t0 <= tf");
  if (!T_0) throw ConfigError("initial temperature T_0 is required");
}

double p_gamma(double T, double dTdn, double I_dot_n, double k, double T_m, double gamma) {
  return (T - T_m) - gamma * (k * dTdn - I_dot_n);
}

bool signorini_kkt_equivalence_check(double d, double sigma, double gamma) {
  const double tol = 1e-12 * std::max({1.0, std::abs(d), std::abs(sigma)});
  const bool kkt = sigma <= tol && d <= tol && std::min(std::abs(sigma), std::abs(d)) <= tol;
  const double proj = -std::max(d - gamma * sigma, 0.0) / gamma;
  const bool identity = std::abs(sigma - proj) <= tol * (1.0 + 1.0 / gamma);
  return kkt == identity;
}

NodalTemperature to_nodal(const FeField& T) {
  const FunctionSpace& V = *T.space;
  if (V.kind() == SpaceKind::P2Background || V.components() != 1) {
    throw AssemblyError("nodal temperature needs a scalar P1 field");
  }
  const int nv = V.mesh()->n_vertices();
  NodalTemperature out{Eigen::VectorXd::Zero(nv), std::vector<char>(nv, 0)};
  for (int d = 0; d < V.n_dofs(); ++d) {
    out.values[V.dof_vertex(d)] = T.coeffs[d];
    out.defined[V.dof_vertex(d)] = 1;
  }
  return out;
}

FeField transfer(const NodalTemperature& T, const SpacePtr& space) {
  const BackgroundMesh& mesh = *space->mesh();
  if (T.values.size() != mesh.n_vertices() ||
      static_cast<int>(T.defined.size()) != mesh.n_vertices()) {
    throw AssemblyError("nodal temperature does not match the mesh");
  }
  if (std::none_of(T.defined.begin(), T.defined.end(), [](char c) { return c != 0; })) {
    throw AssemblyError("nodal temperature has no defined vertex");
  }
  Eigen::VectorXd c(space->n_dofs());
  std::vector<int> seen(mesh.n_vertices(), -1);
  for (int d = 0; d < space->n_dofs(); ++d) {
    const int v = space->dof_vertex(d);
    if (T.defined[v]) {
      c[d] = T.values[v];
      continue;
    }
    // Breadth-first rings; nearest in distance within the first ring that has a hit.
    std::vector<int> ring{v};
    seen[v] = d;
    int best = -1;
    while (best < 0 && !ring.empty()) {
      std::vector<int> next;
      double best_dist = std::numeric_limits<double>::infinity();
      for (int u : ring) {
        for (int w : mesh.vertex_neighbors(u)) {
          if (seen[w] == d) continue;
          seen[w] = d;
          next.push_back(w);
          if (T.defined[w]) {
            const double dist = (mesh.vertex(w) - mesh.vertex(v)).squaredNorm();
            if (dist < best_dist) {
              best_dist = dist;
              best = w;
            }
          }
        }
      }
      ring = std::move(next);
    }
    c[d] = T.values[best];
  }
  return FeField(space, std::move(c));
}

FeField interpolate_initial(const ProblemSpec& spec, const SpacePtr& space, double t) {
  const BackgroundMesh& mesh = *space->mesh();
  Eigen::VectorXd c(space->n_dofs());
  for (int d = 0; d < space->n_dofs(); ++d) {
    c[d] = spec.T_0(mesh.vertex(space->dof_vertex(d)), t);
    if (!std::isfinite(c[d])) throw AssemblyError("initial temperature is not finite at dof " + std::to_string(d));
  }
  return FeField(space, std::move(c));
}

int check_initial_temperature(const ProblemSpec& spec, const CutGeometry& geometry, double t) {
  int above = 0, total = 0;
  for (const SubTriangle& st : geometry.physical_subtris) {
    for (const auto& q : triangle_rule(2)) {
      ++total;
      if (spec.T_0(map_point(q, st.vertices[0], st.vertices[1], st.vertices[2]), t) >= spec.material.T_m) ++above;
    }
  }
  if (above > 0) {
    log_warning("initial temperature reaches T_m at " + std::to_string(above) + " of " +
                std::to_string(total) + " material quadrature points");
  }
  return above;
}

StepAssembler::StepAssembler(const CutGeometry& geometry, const NormalField& normal,
                             SpacePtr space, const ProblemSpec& spec, const FeField& T_prev,
                             double t_next, double dt)
    : space_(std::move(space)), mat_(spec.material), theta1_(spec.nitsche.theta1),
      theta2_(spec.nitsche.theta2), t_next_(t_next) {
  if (!(dt > 0.0)) throw AssemblyError("time step must be positive");
  if (!T_prev.space || !T_prev.space->same_layout(*space_)) {
    throw AssemblyError("previous temperature lives on a different space");
  }
  const BackgroundMesh& mesh = *space_->mesh();
  const double h = mesh.h_max();
  gamma_ = spec.nitsche.gamma(h);
  const double k = mat_.k;
  const double mass = mat_.rho * mat_.c / dt;
  const int n = space_->n_dofs();

  SystemBuilder b(n);
  assemble_bulk(geometry, *space_, {mass, k}, b);
  assemble_ghost_penalty(geometry, *space_, spec.nitsche.gamma_T * k * h, b);
  if (!geometry.dirichlet_facets.empty()) {
    if (!spec.T_D) throw AssemblyError("Dirichlet facets present but no T_D given");
    assemble_nitsche_dirichlet(geometry, *space_, k, spec.nitsche.gamma_b,
                               [&](const Vec2& x) { return spec.T_D(x, t_next); }, b);
  }
  if (spec.q_N && !geometry.neumann_facets.empty()) {
    assemble_neumann_load(geometry, *space_, [&](const Vec2& x) { return spec.q_N(x, t_next); }, b);
  }
  if (spec.f) {
    assemble_bulk_load(geometry, *space_, [&](const Vec2& x) { return spec.f(x, t_next); }, b);
  }

  const double th1 = theta1_, th2 = theta2_, g = gamma_;
  for_each_interface_point(geometry, *space_, 3, [&](const InterfacePoint& p) {
    Qp q;
    q.dofs = p.dofs;
    q.shape = p.shape;
    q.dn = p.dn;
    q.weight = p.weight;
    q.I_dot_n = 0.0;
    if (spec.beam) {
      const Vec2 ng = normal.value(p.cell, Vec3(p.shape[0], p.shape[1], p.shape[2]));
      q.I_dot_n = spec.beam->flux(p.x, t_next, ng).dot(p.normal);
    }
    if (!std::isfinite(q.I_dot_n)) {
      throw AssemblyError("beam flux is not finite on interface segment " + std::to_string(p.segment));
    }
    for (int i = 0; i < 3; ++i) {
      const double pd = th1 * p.shape[i] - g * th2 * k * p.dn[i];
      for (int j = 0; j < 3; ++j) b.add(p.dofs[i], p.dofs[j], p.weight * k * p.dn[j] * (pd - p.shape[i]));
      b.add_rhs(p.dofs[i], p.weight * q.I_dot_n * pd);
    }
    qps_.push_back(q);
  });

  SparseSystem sys = b.build();
  A_ = std::move(sys.matrix);
  b_ = std::move(sys.rhs);

  SystemBuilder m(n);
  assemble_bulk(geometry, *space_, {mass, 0.0}, m);
  b_ += m.matrix() * T_prev.coeffs;
  if (!b_.allFinite()) throw AssemblyError("step right-hand side is not finite");
}

StepAssembler::Linearization StepAssembler::linearize(const FeField& T_iter) const {
  if (!T_iter.space || !T_iter.space->same_layout(*space_)) {
    throw AssemblyError("Newton iterate lives on a different space");
  }
  const Eigen::VectorXd& T = T_iter.coeffs;
  const double k = mat_.k, g = gamma_;
  Linearization out;
  out.system.rhs = b_ - A_ * T;
  out.active.assign(qps_.size(), 0);
  out.max_violation = -std::numeric_limits<double>::infinity();

  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t a = 0; a < qps_.size(); ++a) {
    const Qp& q = qps_[a];
    double Tv = 0.0, dTdn = 0.0;
    for (int i = 0; i < 3; ++i) {
      Tv += q.shape[i] * T[q.dofs[i]];
      dTdn += q.dn[i] * T[q.dofs[i]];
    }
    out.max_violation = std::max(out.max_violation, Tv - mat_.T_m);
    const double P = p_gamma(Tv, dTdn, q.I_dot_n, k, mat_.T_m, g);
    if (!std::isfinite(P)) throw AssemblyError("non-finite P_gamma at interface point " + std::to_string(a));
    if (!(P > 0.0)) continue;
    out.active[a] = 1;
    for (int i = 0; i < 3; ++i) {
      const double pd = theta1_ * q.shape[i] - g * theta2_ * k * q.dn[i];
      out.system.rhs[q.dofs[i]] -= q.weight / g * P * pd;
      for (int j = 0; j < 3; ++j) {
        trip.emplace_back(q.dofs[i], q.dofs[j], q.weight / g * (q.shape[j] - g * k * q.dn[j]) * pd);
      }
    }
  }
  if (trip.empty()) {
    out.system.matrix = A_;
  } else {
    Eigen::SparseMatrix<double, Eigen::RowMajor> DN(A_.rows(), A_.cols());
    DN.setFromTriplets(trip.begin(), trip.end());
    out.system.matrix = A_ + DN;
  }
  return out;
}

SparseSystem assemble_step_system(const CutGeometry& geometry, const NormalField& normal,
                                  const ProblemSpec& spec, const FeField& T_prev,
                                  const FeField& T_iter, double t_next) {
  const StepAssembler a(geometry, normal, T_prev.space, spec, T_prev, t_next, spec.dt);
  return a.linearize(T_iter).system;
}

namespace {

double residual_floor(const StepAssembler& a, const Eigen::VectorXd& T) {
  const auto& A = a.linear_matrix();
  const Eigen::VectorXd s = A.cwiseAbs() * T.cwiseAbs() + a.linear_rhs().cwiseAbs();
  return 100.0 * std::numeric_limits<double>::epsilon() * s.norm();
}

} // namespace

NewtonResult newton_solve(const StepAssembler& assembler, const FeField& guess,
                          const NewtonOptions& options) {
  NewtonReport rep;
  FeField T = guess;
  std::vector<char> prev_active;
  double r0 = 0.0;
  int stable = 0;
  for (int it = 0;; ++it) {
    StepAssembler::Linearization lin = assembler.linearize(T);
    const double r = lin.system.rhs.norm();
    if (!std::isfinite(r)) {
      throw NewtonError("Newton residual is not finite at iteration " + std::to_string(it), rep);
    }
    if (it == 0) r0 = r;
    rep.residual_floor = residual_floor(assembler, T.coeffs);
    const double tol = std::max({options.atol, options.rtol * r0, rep.residual_floor});

    int changes = 0;
    if (it > 0) {
      for (std::size_t a = 0; a < lin.active.size(); ++a) changes += lin.active[a] != prev_active[a];
      rep.active_set_changes.push_back(changes);
      stable = changes == 0 ? stable + 1 : 0;
      const double prev = rep.residual_history.back();
      if (stable >= 2 && r > tol && r > 0.1 * prev) rep.fast_tail = false;
    }
    rep.residual_history.push_back(r);
    rep.active_points.push_back(static_cast<int>(
        std::count(lin.active.begin(), lin.active.end(), char{1})));
    rep.max_violation = lin.max_violation;
    prev_active = std::move(lin.active);

    if (r <= tol) {
      rep.converged = true;
      rep.iterations = it;
      return {std::move(T), std::move(rep)};
    }
    if (it >= options.max_iterations) {
      rep.iterations = it;
      std::ostringstream msg;
      msg << "Newton did not converge in " << it << " iterations (residual " << r << ", target "
          << tol << ")";
      throw NewtonError(msg.str(), rep);
    }
    const Eigen::VectorXd dT = solve_sparse(lin.system, options.solver);
    T.coeffs += dT;
    if (!T.coeffs.allFinite()) throw NewtonError("Newton update is not finite", rep);
  }
}

} // namespace cutstefan
