#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "sceneforge/geom/analytic.hpp"
#include "sceneforge/geom/bvh.hpp"
#include "sceneforge/obs/camera.hpp"

namespace sceneforge {

inline constexpr std::uint16_t kEmptyLabel = 65535;

/// One posed view. Depth is the ray length to the first hit (0 = no hit).
struct Observation {
  Camera camera;
  std::vector<float> depth;
  std::vector<std::uint16_t> mask;
  /// World-space unit normals per pixel; empty when absent, zero at misses.
  std::vector<Vec3f> normal;

  std::size_t pixels() const { return static_cast<std::size_t>(camera.width) * camera.height; }
  std::size_t pixel(int u, int v) const { return static_cast<std::size_t>(v) * camera.width + u; }
  /// World point seen at pixel (u, v); only meaningful where depth > 0.
  Vec3 back_project(int u, int v) const {
    return camera.center() + double(depth[pixel(u, v)]) * camera.ray(u, v);
  }
  bool operator==(const Observation&) const = default;
};

/// Ground-truth object: an analytic shape posed in the world.
struct GtObject {
  int id = 0;
  AnalyticSdf shape;
  RigidTransform pose;
};

/// Sphere tracing against the union of the objects.
Observation render_observation(const std::vector<GtObject>& gt, const Camera& cam);

/// Meshes posed in world space, ready for ray casting.
struct MeshScene {
  std::vector<int> ids;
  std::vector<MeshBvh> bvhs;

  void add(int id, const TriMesh& world_mesh);
};

/// Pixel region to render: half-open box [u0, u1) x [v0, v1).
struct PixelRect {
  int u0 = 0, v0 = 0, u1 = 0, v1 = 0;
};

/// Depth, label and face-normal image of the meshes. Pixels outside rect
/// (when given) are left empty.
Observation render_meshes(const MeshScene& scene, const Camera& cam,
                          const std::optional<PixelRect>& rect = std::nullopt);

/// Normals from depth by crossing neighbouring back-projections; oriented
/// toward the camera. Pixels without valid neighbours get zero.
std::vector<Vec3f> estimate_normals(const Observation& obs);

/// Files frame_NNN.{depth.pfm, mask.pgm, camera.json[, normal.pfm]}.
void save_observations(const std::vector<Observation>& obs, const std::filesystem::path& dir);
std::vector<Observation> load_observations(const std::filesystem::path& dir);

/// Portable float map, little-endian (scale -1), rows stored bottom-up.
void write_pfm(const std::filesystem::path& path, int width, int height, int channels,
               const std::vector<float>& data);
std::vector<float> read_pfm(const std::filesystem::path& path, int& width, int& height,
                            int& channels);
/// Binary 16-bit PGM (big-endian samples, maxval 65535).
void write_pgm16(const std::filesystem::path& path, int width, int height,
                 const std::vector<std::uint16_t>& data);
std::vector<std::uint16_t> read_pgm16(const std::filesystem::path& path, int& width, int& height);

}  // namespace sceneforge
