#pragma once

#include "cutstefan/stefan_nitsche.hpp"

namespace cutstefan {

/// Stabilized L2 projection of grad(T) onto vector P1 on the active mesh.
FeField smooth_gradient(const FeField& T, const CutGeometry& geometry, double gamma_GT);

/// Where the Heaviside factor H(P_gamma) is sampled for a point of Omega*.
enum class VelocityGate {
  /// At the quadrature point itself.
  Pointwise,
  /// At the closest point of Gamma_h (cut cells); other cells inherit the
  /// gate of the nearest cut cell.
  ClosestInterfacePoint,
};

struct VelocityOptions {
  VelocityGate gate = VelocityGate::ClosestInterfacePoint;
  int quadrature_degree = 4;
};

/// L2 projection over Omega* of H (k G_T - I).n / (rho L), minus the theta1
/// interface term. Returns a scalar P1 field on the active space of T.
FeField normal_velocity(const FeField& T, const FeField& G_T, const NormalField& normal,
                        const CutGeometry& geometry, const ProblemSpec& spec, double t,
                        const VelocityOptions& options = {});

struct VelocityField {
  /// Scalar normal speed on the background P1 space.
  FeField vn_ext;
  /// Vector velocity vn_ext * n on the background P1 space.
  FeField v_ext;
  std::vector<char> reached;
  bool monotone = true;
};

inline constexpr double kExtensionBand = 8.0;

/// Closest-point values on the nodes of cut cells, then fast marching out to
/// band_factor * h; zero where marching never arrives.
FeField fast_march_extend(const FeField& v_n, const CutGeometry& geometry,
                          double band_factor = kExtensionBand,
                          std::vector<char>* reached = nullptr, bool* monotone = nullptr);

/// Nodal product of a scalar background P1 field with the normal field.
FeField vectorize(const FeField& vn_ext, const NormalField& normal);

VelocityField extend_velocity(const FeField& v_n, const CutGeometry& geometry,
                              const NormalField& normal, double band_factor = kExtensionBand);

} // namespace cutstefan
