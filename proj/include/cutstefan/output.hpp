#pragma once

#include "cutstefan/simulation.hpp"

#include <string>
#include <vector>

namespace cutstefan {

/// Legacy ASCII VTK of the physical sub-triangulation: cell data parent and
/// cut, point data T, phi and vn_ext (zero when absent).
void write_vtk(const std::string& path, const CutGeometry& geometry, const FeField& T,
               const LevelSetField& phi, const FeField* vn_ext = nullptr);

/// Gamma_h as VTK line cells.
void write_interface_vtk(const std::string& path, const CutGeometry& geometry);

/// JSON snapshot of a simulation state, doubles written round-trip exact.
void save_state(const std::string& path, const StefanState& state);
/// Reads a snapshot back onto the given background mesh.
StefanState load_state(const std::string& path, const MeshPtr& mesh);

struct SurfaceSample {
  double x;
  double height;
};

/// Highest interface crossing of each vertical line x_i, i = 0..n-1, evenly
/// spaced in [x0, x1]; columns without interface are skipped.
std::vector<SurfaceSample> surface_profile(const CutGeometry& geometry, double x0, double x1, int n);

struct CavityMetrics {
  /// mean of (surface0 - height) over the samples.
  double depth = 0.0;
  /// standard deviation of the height.
  double roughness = 0.0;
  int samples = 0;
};

CavityMetrics cavity_metrics(const std::vector<SurfaceSample>& profile, double surface0);

void write_profile_csv(const std::string& path, const std::vector<SurfaceSample>& profile);

} // namespace cutstefan
