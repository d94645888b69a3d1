#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sceneforge/geom/trimesh.hpp"

namespace sceneforge {

struct RayHit {
  double t = 0.0;
  std::uint32_t face = 0;
  double u = 0.0;  // barycentric weight of vertex 1
  double v = 0.0;  // barycentric weight of vertex 2
};

struct ClosestPoint {
  Vec3 point = Vec3::Zero();
  double distance2 = 0.0;
  std::uint32_t face = 0;
};

/// Axis-aligned bounding-volume hierarchy over the faces of a mesh. Holds
/// a reference-free copy of the triangle corners so it can outlive the mesh.
class MeshBvh {
 public:
  MeshBvh() = default;
  explicit MeshBvh(const TriMesh& mesh);

  bool empty() const { return nodes_.empty(); }
  const Aabb& bounds() const { return nodes_.front().box; }
  std::size_t face_count() const { return tris_.size(); }
  const std::array<Vec3, 3>& triangle(std::size_t f) const { return tris_[f]; }

  /// Nearest hit with t in (t_min, t_max).
  std::optional<RayHit> raycast(const Vec3& origin, const Vec3& dir,
                                double t_min = 0.0,
                                double t_max = 1e30) const;
  /// Closest surface point; nullopt when nothing lies within max_distance.
  std::optional<ClosestPoint> closest(const Vec3& p,
                                      double max_distance = 1e30) const;

  /// True iff some triangle of this hierarchy intersects some triangle of
  /// other.
  bool intersects(const MeshBvh& other) const;
  /// Every (this face, other face) pair whose triangles intersect.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> intersecting_pairs(
      const MeshBvh& other) const;

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // leaf: first index into order_; inner: left child
    std::uint32_t count = 0;  // leaf: face count; inner: 0
    std::uint32_t right = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  template <class Visit>
  bool pair_traverse(const MeshBvh& other, Visit&& visit) const;

  std::vector<std::array<Vec3, 3>> tris_;
  std::vector<Aabb> tri_boxes_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// Triangle-triangle overlap test (including coplanar overlap and touching).
bool triangles_intersect(const std::array<Vec3, 3>& a,
                         const std::array<Vec3, 3>& b);

/// Closest point on triangle abc to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c);

}  // namespace sceneforge
