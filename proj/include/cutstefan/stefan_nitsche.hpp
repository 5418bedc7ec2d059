#pragma once

#include "cutstefan/fem.hpp"
#include "cutstefan/laser.hpp"

#include <functional>
#include <vector>

namespace cutstefan {

struct MaterialParams {
  double rho = 1.0;
  double c = 1.0;
  double k = 1.0;
  double L = 1.0;
  double T_m = 0.0;

  void validate() const;
};

/// (theta1, theta2) picks the Nitsche variant; gamma = gamma_hat * h.
struct NitscheParams {
  int theta1 = 0;
  int theta2 = -1;
  double gamma_hat = 1.0;
  double gamma_T = 0.1;
  double gamma_b = 100.0;
  double gamma_GT = 1e-3;

  void validate() const;
  double gamma(double h) const { return gamma_hat * h; }
};

using SpaceTimeFunction = std::function<double(const Vec2&, double)>;

struct ProblemSpec {
  MaterialParams material;
  NitscheParams nitsche;
  SpaceTimeFunction f;
  SpaceTimeFunction q_N;
  SpaceTimeFunction T_D;
  BeamPtr beam;
  SpaceTimeFunction T_0;
  BoundaryMap boundary = kAllNeumann;
  double dt = 1e-3;
  double t0 = 0.0;
  double tf = 1.0;

  void validate() const;
};

/// (T - T_m) - gamma (k dT/dn - I.n)
double p_gamma(double T, double dTdn, double I_dot_n, double k, double T_m, double gamma);

/// True when the pair satisfies both the Signorini KKT triple and the
/// projection identity sigma = -(1/gamma)[(T - T_m) - gamma sigma]_+, or neither.
bool signorini_kkt_equivalence_check(double T_minus_Tm, double sigma, double gamma);

/// Temperature kept per background vertex with a defined mask, so it can
/// follow the active mesh from step to step.
struct NodalTemperature {
  Eigen::VectorXd values;
  std::vector<char> defined;
};

NodalTemperature to_nodal(const FeField& T);

/// Values on the active space: shared vertices copy, newly active vertices
/// take the value of the nearest previously defined vertex.
FeField transfer(const NodalTemperature& T, const SpacePtr& space);

/// Nodal interpolation of T_0 at time t on the active space.
FeField interpolate_initial(const ProblemSpec& spec, const SpacePtr& space, double t);

/// Counts material quadrature points where T_0 >= T_m and logs a warning if any.
int check_initial_temperature(const ProblemSpec& spec, const CutGeometry& geometry, double t);

/// A_sharp, L_sharp and the Nitsche-Signorini term for one time step on a
/// frozen geometry; hands out the Newton tangent and residual.
class StepAssembler {
public:
  StepAssembler(const CutGeometry& geometry, const NormalField& normal, SpacePtr space,
                const ProblemSpec& spec, const FeField& T_prev, double t_next, double dt);

  struct Linearization {
    SparseSystem system;  ///< tangent matrix and residual L - A(T) - N(T)
    std::vector<char> active;  ///< H(P_gamma) per interface quadrature point
    double max_violation = 0.0;  ///< max (T - T_m) over interface points
  };
  Linearization linearize(const FeField& T_iter) const;

  const SpacePtr& space() const { return space_; }
  double gamma() const { return gamma_; }
  double t_next() const { return t_next_; }
  int n_interface_points() const { return static_cast<int>(qps_.size()); }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& linear_matrix() const { return A_; }
  const Eigen::VectorXd& linear_rhs() const { return b_; }

private:
  struct Qp {
    std::array<int, 3> dofs;
    std::array<double, 3> shape;
    std::array<double, 3> dn;
    double weight;
    double I_dot_n;
  };

  SpacePtr space_;
  MaterialParams mat_;
  int theta1_;
  int theta2_;
  double gamma_;
  double t_next_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> A_;
  Eigen::VectorXd b_;
  std::vector<Qp> qps_;
};

/// Assembles the Newton system for T_iter in one call.
SparseSystem assemble_step_system(const CutGeometry& geometry, const NormalField& normal,
                                  const ProblemSpec& spec, const FeField& T_prev,
                                  const FeField& T_iter, double t_next);

struct NewtonOptions {
  double atol = 1e-11;
  double rtol = 1e-9;
  int max_iterations = 30;
  SolverKind solver = SolverKind::Iterative;
};

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
  std::vector<int> active_set_changes;
  std::vector<int> active_points;
  /// Residual ratio <= 0.1 on every iteration after the active set settled.
  bool fast_tail = true;
  double max_violation = 0.0;
  /// Rounding level of the residual; counted as converged when reached.
  double residual_floor = 0.0;
};

class NewtonError : public SolverError {
public:
  NewtonError(const std::string& what, NewtonReport report)
      : SolverError(what), report_(std::move(report)) {}
  const NewtonReport& report() const { return report_; }

private:
  NewtonReport report_;
};

struct NewtonResult {
  FeField T;
  NewtonReport report;
};

/// Semi-smooth Newton with the Heaviside tangent; throws NewtonError.
NewtonResult newton_solve(const StepAssembler& assembler, const FeField& guess,
                          const NewtonOptions& options = {});

} // namespace cutstefan
