#pragma once

#include "sceneforge/geom/sdf_grid.hpp"
#include "sceneforge/geom/trimesh.hpp"

namespace sceneforge {

/// Iso-surface of the grid using the classic 256-case table. Vertices are
/// shared per grid edge so closed level sets give closed meshes; faces are
/// wound with normals pointing toward increasing values. Per-vertex normals
/// come from the grid gradient.
TriMesh marching_cubes(const SdfGrid& grid, double iso = 0.0);

}  // namespace sceneforge
