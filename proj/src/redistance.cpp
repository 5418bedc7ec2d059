#include "cutstefan/fast_marching.hpp"
#include "cutstefan/levelset.hpp"

#include <cmath>

namespace cutstefan {

LevelSetField redistance(const LevelSetField& phi, const CutOptions& options) {
  const BackgroundMesh& mesh = *phi.mesh();
  const RefinedMesh& refined = mesh.refined();
  const CutGeometry geometry = build_cut_geometry(phi, options);
  if (geometry.interface_segments.empty()) return phi;

  Eigen::VectorXd values = interpolate_to_refined_linear(phi);
  const double snap = options.snap_factor * mesh.h_max();
  for (int i = 0; i < values.size(); ++i) {
    if (std::abs(values[i]) < snap) values[i] = 0.0;
  }

  const SegmentLocator locator(geometry.interface_segments, mesh.domain(), mesh.h_max());
  std::vector<char> seeded(values.size(), 0);
  std::vector<MarchSeed> seeds;
  for (const auto& tri : refined.triangles) {
    bool neg = false, pos = false, zero = false;
    for (int v : tri) {
      neg |= values[v] < 0.0;
      pos |= values[v] > 0.0;
      zero |= values[v] == 0.0;
    }
    if (!((neg && pos) || zero)) continue;
    for (int v : tri) {
      if (seeded[v]) continue;
      seeded[v] = 1;
      const double d = values[v] == 0.0 ? 0.0 : locator.closest(refined.vertices[v]).distance;
      seeds.push_back({v, d, 0.0});
    }
  }

  const FastMarcher marcher(refined.vertices, refined.triangles);
  const MarchResult r = marcher.march(seeds);
  if (!r.monotone) throw GeometryError("redistance: fast marching lost monotonicity");

  Eigen::VectorXd out(values.size());
  for (int i = 0; i < values.size(); ++i) {
    if (values[i] == 0.0) {
      out[i] = 0.0;
    } else if (!r.reached[i]) {
      out[i] = phi.coefficients()[i];
    } else {
      out[i] = values[i] < 0.0 ? -r.distance[i] : r.distance[i];
    }
  }
  return LevelSetField(phi.mesh(), std::move(out));
}

} // namespace cutstefan
