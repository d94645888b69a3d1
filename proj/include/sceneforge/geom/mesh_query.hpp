#pragma once

#include <cstdint>
#include <vector>

#include "sceneforge/geom/bvh.hpp"
#include "sceneforge/geom/trimesh.hpp"

namespace sceneforge {

struct SurfaceSamples {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // face normal of the sampled face
  std::vector<double> area;   // surface area represented by each sample
};

/// Area-weighted uniform surface sampling. Deterministic in (mesh, count,
/// seed).
SurfaceSamples sample_surface(const TriMesh& mesh, std::size_t count,
                              std::uint64_t seed);

/// Exact triangle overlap test between two meshes given in the same frame.
bool mesh_intersects(const TriMesh& a, const TriMesh& b);
bool mesh_intersects(const MeshBvh& a, const MeshBvh& b);

struct MeshDistanceOptions {
  std::size_t samples = 4096;
  std::uint64_t seed = 0x5eed;
};

/// Symmetric Chamfer distance: mean of the two directed mean
/// nearest-sample distances between area-uniform samplings.
double mesh_distance(const TriMesh& a, const TriMesh& b,
                     const MeshDistanceOptions& opt = {});

/// Smallest distance from a's vertices and surface samples to b's surface.
double directed_min_separation(const TriMesh& a, const MeshBvh& b,
                               const MeshDistanceOptions& opt = {});
/// min of both directions; 0 when the meshes intersect.
double min_separation(const TriMesh& a, const TriMesh& b,
                      const MeshDistanceOptions& opt = {});

}  // namespace sceneforge
