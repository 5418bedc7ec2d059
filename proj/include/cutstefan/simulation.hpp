#pragma once

#include "cutstefan/interface_velocity.hpp"
#include "cutstefan/levelset_transport.hpp"

#include <functional>
#include <optional>
#include <string>

namespace cutstefan {

struct SimulationOptions {
  double theta_transport = 0.5;
  VelocityOptions velocity;
  NewtonOptions newton;
  double band_factor = kExtensionBand;
  bool redistance = true;
  double snap_factor = 1e-10;
  /// Halve dt once and take two half steps when Newton fails.
  bool retry = true;
};

struct StefanState {
  double t = 0.0;
  int step = 0;
  LevelSetField phi;
  /// Temperature on the vertices that were active for the last solve.
  NodalTemperature T;
  /// Extended velocity of the last step (vector P1 on the background mesh).
  std::optional<FeField> v_ext;
  std::optional<FeField> vn_ext;
};

/// Fields of one step: the frozen geometry at t_n, the temperatures before
/// and after the solve, and the interface velocity at t_{n+1}.
struct StepView {
  double t_n;
  double t_next;
  const CutGeometry& geometry;
  const LevelSetField& phi;
  const FeField& T_n;
  const FeField& T_next;
  const FeField& v_n;
  const VelocityField& velocity;
};

struct StepRecord {
  int step = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::vector<NewtonReport> newton;
  bool retried = false;
  bool redistanced = false;
  double cfl = 0.0;
  int active_dofs = 0;
};

class StepError : public Error {
public:
  StepError(std::string stage, int step, const std::string& inner)
      : Error("step " + std::to_string(step) + " failed in " + stage + ": " + inner),
        stage_(std::move(stage)), step_(step) {}
  const std::string& stage() const { return stage_; }
  int step() const { return step_; }

private:
  std::string stage_;
  int step_;
};

/// Time loop of the cut Stefan-Signorini scheme on a fixed background mesh.
class Simulation {
public:
  using Observer = std::function<void(const StepView&)>;

  Simulation(ProblemSpec spec, LevelSetField phi0, SimulationOptions options = {});
  /// Resume from a saved state.
  Simulation(ProblemSpec spec, StefanState state, SimulationOptions options);

  const StefanState& state() const { return state_; }
  const ProblemSpec& spec() const { return spec_; }
  const SimulationOptions& options() const { return options_; }
  const MeshPtr& mesh() const { return state_.phi.mesh(); }

  /// Cut geometry of the current level set (cached).
  const CutGeometry& geometry();
  /// Current temperature on the active space of geometry().
  FeField temperature();

  bool finished() const { return state_.t >= spec_.tf - 0.5 * spec_.dt; }
  int total_steps() const;

  void set_observer(Observer o) { observer_ = std::move(o); }

  /// One step of size spec.dt, with the single halving retry.
  StepRecord step();

private:
  StepRecord advance(double dt);
  CutOptions cut_options() const { return {spec_.boundary, options_.snap_factor}; }

  ProblemSpec spec_;
  SimulationOptions options_;
  StefanState state_;
  std::optional<CutGeometry> geometry_;
  NormalProjector projector_;
  Advector advector_;
  Observer observer_;
};

} // namespace cutstefan
