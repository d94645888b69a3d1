#pragma once

#include <filesystem>
#include <string>

#include "sceneforge/geom/sdf_grid.hpp"
#include "sceneforge/geom/trimesh.hpp"

namespace sceneforge {

/// ASCII OBJ with v / vn / f records. Faces reference normals by the same
/// index when normals are present.
void write_obj(const TriMesh& mesh, const std::filesystem::path& path);
std::string obj_string(const TriMesh& mesh);
TriMesh read_obj(const std::filesystem::path& path);

/// Binary container: 16-byte magic "SDFGRID1" (NUL padded), then
/// little-endian dims (3 x u32), origin (3 x f64), spacing (f64),
/// truncation (f64), values (f32, x-fastest), weights flag (u8) and the
/// optional weight array (f32).
void write_sdfgrid(const SdfGrid& grid, const std::filesystem::path& path);
SdfGrid read_sdfgrid(const std::filesystem::path& path);

/// Shortest round-trip decimal for a double; used for every text export.
std::string format_double(double v);

}  // namespace sceneforge
