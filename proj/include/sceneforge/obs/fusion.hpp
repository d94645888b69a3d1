#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sceneforge/geom/sdf_grid.hpp"
#include "sceneforge/obs/observation.hpp"

namespace sceneforge {

/// Truncated signed distance of one instance, in world coordinates.
struct FusedInstance {
  int id = 0;
  /// Weight = number of observations that updated the voxel; weight-0
  /// voxels hold +truncation.
  SdfGrid sdf;
  /// 1 where some view saw through the voxel (known empty space).
  std::vector<std::uint8_t> carved;
  /// Observed near-surface voxels over all near-surface voxels.
  double observed_fraction = 0.0;
  /// World points back-projected from the instance's pixels (subsampled).
  std::vector<Vec3> points;
};

struct FusionOptions {
  int resolution = 64;
  double truncation_voxels = 4.0;
  double padding = 0.1;
  /// Explicit grid placement; derived from the back-projected points when
  /// absent.
  std::optional<GridSpec> grid;
};

/// Masked TSDF integration of every pixel labelled `id`; other pixels only
/// carve free space in front of their observed depth.
FusedInstance fuse_instance(const std::vector<Observation>& obs, int id,
                            const FusionOptions& opt = {});

/// Ids that appear in at least one mask (excluding the empty label).
std::vector<int> visible_ids(const std::vector<Observation>& obs);

}  // namespace sceneforge
