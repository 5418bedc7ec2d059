#include "cutstefan/simulation.hpp"

#include "cutstefan/log.hpp"

#include <cmath>

namespace cutstefan {

Simulation::Simulation(ProblemSpec spec, LevelSetField phi0, SimulationOptions options)
    : spec_(std::move(spec)), options_(options), state_{spec_.t0, 0, std::move(phi0), {}, {}, {}},
      projector_(state_.phi.mesh()), advector_(state_.phi.mesh()) {
  spec_.validate();
  const CutGeometry& g = geometry();
  check_initial_temperature(spec_, g, spec_.t0);
  state_.T = to_nodal(interpolate_initial(spec_, FunctionSpace::p1_active(g), spec_.t0));
}

Simulation::Simulation(ProblemSpec spec, StefanState state, SimulationOptions options)
    : spec_(std::move(spec)), options_(options), state_(std::move(state)),
      projector_(state_.phi.mesh()), advector_(state_.phi.mesh()) {
  spec_.validate();
  if (state_.T.values.size() != mesh()->n_vertices()) {
    throw ConfigError("restart state does not match the mesh");
  }
}

const CutGeometry& Simulation::geometry() {
  if (!geometry_) geometry_ = build_cut_geometry(state_.phi, cut_options());
  return *geometry_;
}

FeField Simulation::temperature() { return transfer(state_.T, FunctionSpace::p1_active(geometry())); }

int Simulation::total_steps() const {
  return static_cast<int>(std::llround((spec_.tf - spec_.t0) / spec_.dt));
}

StepRecord Simulation::step() {
  const StefanState saved = state_;
  const auto saved_geometry = geometry_;
  try {
    return advance(spec_.dt);
  } catch (const NewtonError& e) {
    if (!options_.retry) throw StepError("newton", state_.step, e.what());
    log_warning(std::string("retrying with half time step: ") + e.what());
    state_ = saved;
    geometry_ = saved_geometry;
  }
  try {
    StepRecord first = advance(0.5 * spec_.dt);
    StepRecord second = advance(0.5 * spec_.dt);
    first.newton.insert(first.newton.end(), second.newton.begin(), second.newton.end());
    first.t_end = second.t_end;
    first.retried = true;
    first.redistanced = first.redistanced || second.redistanced;
    first.cfl = std::max(first.cfl, second.cfl);
    state_.step = saved.step + 1;
    return first;
  } catch (const NewtonError& e) {
    state_ = saved;
    geometry_ = saved_geometry;
    throw StepError("newton", saved.step, std::string(e.what()) + " (after halving dt)");
  }
}

StepRecord Simulation::advance(double dt) {
  StepRecord rec;
  rec.step = state_.step;
  rec.t_begin = state_.t;
  const double t_next = state_.t + dt;
  std::string stage = "geometry";
  try {
    const CutGeometry& g = geometry();
    const SpacePtr V = FunctionSpace::p1_active(g);
    rec.active_dofs = V->n_dofs();
    const FeField T_n = transfer(state_.T, V);

    stage = "normal";
    const NormalField normal = projector_.project(state_.phi);

    stage = "newton";
    const StepAssembler assembler(g, normal, V, spec_, T_n, t_next, dt);
    NewtonResult nr = newton_solve(assembler, T_n, options_.newton);
    rec.newton.push_back(nr.report);

    stage = "velocity";
    const FeField G_T = smooth_gradient(nr.T, g, spec_.nitsche.gamma_GT);
    const FeField v_n = normal_velocity(nr.T, G_T, normal, g, spec_, t_next, options_.velocity);
    VelocityField vel = extend_velocity(v_n, g, normal, options_.band_factor);

    if (observer_) observer_({state_.t, t_next, g, state_.phi, T_n, nr.T, v_n, vel});

    stage = "transport";
    TransportParams tp{options_.theta_transport, dt, 5};
    TransportReport trep;
    const FeField& v_old = state_.v_ext ? *state_.v_ext : vel.v_ext;
    LevelSetField phi_next = advector_.advect(state_.phi, v_old, vel.v_ext, tp, &trep);
    rec.cfl = trep.cfl;

    state_.phi = std::move(phi_next);
    state_.T = to_nodal(nr.T);
    state_.v_ext = std::move(vel.v_ext);
    state_.vn_ext = std::move(vel.vn_ext);
    state_.t = t_next;
    state_.step += 1;
    geometry_.reset();

    stage = "redistance";
    const CutGeometry& g_next = geometry();
    if (options_.redistance && needs_redistance(state_.phi, g_next)) {
      state_.phi = redistance(state_.phi, cut_options());
      geometry_.reset();
      geometry();
      rec.redistanced = true;
    }
  } catch (const NewtonError&) {
    throw;
  } catch (const StepError&) {
    throw;
  } catch (const Error& e) {
    throw StepError(stage, rec.step, e.what());
  }
  rec.t_end = state_.t;
  return rec;
}

} // namespace cutstefan
