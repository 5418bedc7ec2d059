#pragma once

#include "cutstefan/expression.hpp"
#include "cutstefan/simulation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cutstefan {

enum class Scenario { Ablation, Manufactured };

struct LevelSetInit {
  enum class Kind { Plane, Circle, Expression };
  Kind kind = Kind::Plane;
  /// Plane: a point on the surface and the normal pointing out of the material.
  Vec2 point{0.0, 1.0};
  Vec2 normal{0.0, 1.0};
  /// Circle: material outside unless material_inside.
  Vec2 center{0.0, 0.0};
  double radius = 0.5;
  bool material_inside = false;
  /// Negative in the material.
  std::string expression;

  std::function<double(const Vec2&)> function() const;
};

struct OutputConfig {
  std::string dir = "output";
  int every = 10;
  bool vtk = true;
  /// x-range of the surface profile and cavity metrics of ablation runs;
  /// empty means the whole domain width.
  std::optional<std::pair<double, double>> profile;
};

struct RunConfig {
  Scenario scenario = Scenario::Ablation;
  Rect domain{{0.0, 0.0}, {3.0, 1.2}};
  int nx = 63;
  int ny = 25;
  double t0 = 0.0;
  double tf = 1.6;
  double dt = 5e-4;
  MaterialParams material{1.0, 1.0, 1.0, 1.0, 0.1};
  NitscheParams nitsche;
  BoundaryMap boundary{BoundaryKind::Neumann, BoundaryKind::Neumann, BoundaryKind::Dirichlet,
                       BoundaryKind::Neumann};
  double T_initial = 0.0;
  double T_dirichlet = 0.0;
  double q_neumann = 0.0;
  LevelSetInit level_set;
  std::optional<BeamSpec> beam;
  SimulationOptions simulation;
  OutputConfig output;

  struct Problem {
    std::string key;  ///< top-level block, e.g. "material"
    std::string message;
  };
  /// Every problem with the configuration; empty when valid.
  std::vector<Problem> problems() const;
  /// Throws ConfigError listing all problems.
  void validate() const;

  MeshPtr mesh() const;
  ProblemSpec problem() const;
  LevelSetField initial_level_set(const MeshPtr& mesh) const;
};

/// Preset of the pulsed two-dimensional ablation run with pulse period P0.
RunConfig pulsed_ablation_config(double P0);

/// Manufactured case on (-1.5, 1.5)^2 with the given cells per side.
RunConfig manufactured_config(int cells, double dt, double tf = 0.1);

/// Parses YAML text. Every problem is reported as "line:column: key: message"
/// and thrown together as one ConfigError, before anything is computed.
RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::string& path);

/// YAML that parse_config reads back to the same configuration.
std::string dump_config(const RunConfig& config);

} // namespace cutstefan
