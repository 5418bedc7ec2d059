#pragma once

#include "cutstefan/manufactured.hpp"
#include "cutstefan/simulation.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cutstefan {

/// A norm ratio; `relative` is false when the exact norm vanished and the
/// absolute norm was reported instead.
struct NormValue {
  double value = 0.0;
  bool relative = true;
};

struct FieldErrors {
  NormValue l2;
  NormValue h1;
  NormValue gamma_l2;
};

using ScalarFunction = std::function<double(const Vec2&)>;
using VectorFunction = std::function<Vec2(const Vec2&)>;

/// Relative L2 and H1 errors over Omega_h and L2 error over Gamma_h of a
/// scalar P1 field, with degree-4 quadrature on the cut pieces.
FieldErrors error_norms(const FeField& u, const ScalarFunction& exact, const VectorFunction& grad_exact,
                        const CutGeometry& geometry);

/// Relative L2(Gamma_h) error of a quantity sampled per interface point.
NormValue interface_error(const CutGeometry& geometry,
                          const std::function<double(int cell, const Vec2& x)>& computed,
                          const ScalarFunction& exact);

struct InterfaceAverages {
  double v_avg = 0.0;
  double r_avg = 0.0;
  double length = 0.0;
};

/// Line averages of v_n and of |x - center| over Gamma_h.
InterfaceAverages interface_averages(const CutGeometry& geometry, const FeField& v_n,
                                     const Vec2& center = Vec2::Zero());

struct StepErrors {
  int step = 0;
  double t = 0.0;
  FieldErrors T;
  NormValue velocity;
  NormValue radius;
  double v_avg = 0.0;
  double v_exact = 0.0;
  double r_avg = 0.0;
  double r_exact = 0.0;
};

struct ErrorAggregate {
  double T_l2 = 0.0;
  double T_h1 = 0.0;
  double T_gamma = 0.0;
  double velocity = 0.0;
  double radius = 0.0;
  /// max over steps of |r_avg - R|.
  double max_radius_deviation = 0.0;
};

/// sqrt of the mean of squares.
double l2_in_time(const std::vector<double>& values);

struct ErrorReport {
  std::vector<StepErrors> steps;
  /// Errors of the last temperature against the exact solution at tf.
  FieldErrors final_T;
  double final_t = 0.0;

  ErrorAggregate aggregate() const;
  bool any_absolute() const;
};

struct ManufacturedRunOptions {
  int cells = 60;  ///< cells per side of the background square
  double dt = 1e-4;
  double t0 = 0.0;
  double tf = 0.1;
  NitscheParams nitsche;
  SimulationOptions simulation;
};

struct ManufacturedRun {
  ManufacturedRunOptions options;
  ErrorReport report;
  std::vector<StepRecord> records;
  std::optional<StefanState> final_state;
  double seconds = 0.0;
  bool failed = false;
  std::string message;
  /// Cell leg length.
  double h = 0.0;
};

/// Runs the manufactured case and measures errors at every step: T^n on the
/// geometry of t_n, v_n against -alpha(t_{n+1}) and |x| against R(t_n).
ManufacturedRun run_manufactured(const ManufacturedRunOptions& options,
                                 const ManufacturedCase& mc = {});

/// Least-squares slope of log(y) against log(x) over the last three points.
double fit_order(const std::vector<double>& x, const std::vector<double>& y);

enum class StudyAxis { Space, Time };

struct ConvergenceTable {
  StudyAxis axis = StudyAxis::Space;
  std::vector<ManufacturedRun> runs;
  /// Orders of T_l2, T_h1, T_gamma, velocity, radius (aggregates) and of the
  /// final-time T_l2; NaN when fewer than two runs succeeded.
  std::vector<std::pair<std::string, double>> orders;

  double order(const std::string& name) const;
  void write_csv(std::ostream& out) const;
};

/// One run per configuration; a failed run stays in the table with its message.
ConvergenceTable convergence_study(const std::vector<ManufacturedRunOptions>& configs, StudyAxis axis,
                                   const ManufacturedCase& mc = {});

/// Orders of a table built from finished runs.
ConvergenceTable tabulate(std::vector<ManufacturedRun> runs, StudyAxis axis);

/// L2 norm of T_a - T_b over the material of state a, relative to the exact
/// temperature at a.t. Cells where either temperature is undefined are skipped.
double final_difference(const StefanState& a, const StefanState& b, const ManufacturedCase& mc = {});

struct FlatCutOptions {
  int cells = 32;
  /// Symmetric Nitsche penalty gamma / h on the interface.
  double gamma = 10.0;
  /// Ghost penalty gamma_g * h; zero switches the ghost terms off.
  double gamma_ghost = 0.1;
};

/// Spectral condition number of the Poisson-Nitsche matrix on (0,1)^2 with
/// material below the flat interface y = 1/2 + offset * h, Nitsche Dirichlet
/// on the bottom side and Neumann elsewhere.
double flat_cut_condition_number(double offset, const FlatCutOptions& options = {});

/// max / min of the condition numbers over the offsets.
double condition_spread(const std::vector<double>& offsets, const FlatCutOptions& options = {});

} // namespace cutstefan
