#pragma once

#include "cutstefan/fem.hpp"

#include <memory>

namespace cutstefan {

struct TransportParams {
  double theta = 0.5;
  double dt = 1e-3;
  int quadrature_degree = 5;

  void validate() const;
};

/// 2 (1/dt^2 + v.v/h^2)^(-1/2)
double tau_sd(const Vec2& v, double dt, double h);

struct TransportReport {
  /// max |v| dt / h_K over cells and quadrature points.
  double cfl = 0.0;
  SolveReport solve;
};

inline constexpr double kCflWarning = 1.0;

/// Theta-scheme SUPG advection of the P2 level set. The sparsity pattern of
/// the P2 system is built once per mesh and reused.
class Advector {
public:
  explicit Advector(MeshPtr mesh);
  ~Advector();
  Advector(Advector&&) noexcept;
  Advector& operator=(Advector&&) noexcept;

  /// v_n and v_np1 are vector P1 fields on the background mesh.
  LevelSetField advect(const LevelSetField& phi_n, const FeField& v_n, const FeField& v_np1,
                       const TransportParams& params, TransportReport* report = nullptr) const;

  const MeshPtr& mesh() const { return mesh_; }

private:
  struct Impl;
  MeshPtr mesh_;
  std::unique_ptr<Impl> impl_;
};

LevelSetField advect(const LevelSetField& phi_n, const FeField& v_n, const FeField& v_np1,
                     const TransportParams& params, TransportReport* report = nullptr);

} // namespace cutstefan
