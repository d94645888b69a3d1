#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sceneforge/geom/rigid_transform.hpp"
#include "sceneforge/geom/types.hpp"

namespace sceneforge {

using Face = std::array<std::uint32_t, 3>;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  /// Per-vertex unit normals; empty when absent.
  std::vector<Vec3> normals;

  bool empty() const { return faces.empty(); }
  Aabb bounds() const;

  Vec3 face_normal(std::size_t f) const;  // unit, zero for zero-area faces
  double face_area(std::size_t f) const;
  double area() const;
  /// Signed volume by the divergence theorem (positive when outward wound).
  double volume() const;

  /// Number of undirected edges not shared by exactly two faces.
  std::size_t boundary_edges() const;
  /// Face indices in range and no repeated index within a face.
  bool well_formed() const;

  /// Area-weighted vertex normals from face normals.
  void compute_normals();

  bool operator==(const TriMesh&) const = default;
};

/// Vertices mapped by rotation then translation; normals rotated.
TriMesh transform_mesh(const TriMesh& m, const RigidTransform& t);

/// Concatenation (used to form whole-scene meshes for metrics).
TriMesh merge_meshes(const std::vector<const TriMesh*>& parts);

/// Closed axis-aligned box mesh with each face split into n x n quads.
TriMesh make_box_mesh(const Vec3& half_extents, int subdivisions = 1);

}  // namespace sceneforge
