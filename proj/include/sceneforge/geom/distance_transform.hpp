#pragma once

#include <cstdint>
#include <vector>

#include "sceneforge/geom/sdf_grid.hpp"

namespace sceneforge {

/// Signed distance grid from a voxel occupancy mask (1 = inside) using the
/// exact separable Euclidean distance transform. The surface is placed
/// halfway between inside and outside nodes. Result is clamped to the
/// spec truncation and carries no weights.
SdfGrid occupancy_to_sdf(const std::vector<std::uint8_t>& inside,
                         const GridSpec& spec);

/// Squared Euclidean distance (in voxels) from each node to the nearest
/// node with mask == 1; large value when the mask is empty.
std::vector<double> squared_edt(const std::vector<std::uint8_t>& mask,
                                const std::array<int, 3>& dims);

}  // namespace sceneforge
