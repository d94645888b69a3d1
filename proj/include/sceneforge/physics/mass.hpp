#pragma once

#include "sceneforge/geom/trimesh.hpp"
#include "sceneforge/scene/scene_graph.hpp"

namespace sceneforge {

struct MassProperties {
  double mass = 0.0;
  Vec3 com = Vec3::Zero();           // object frame
  Mat3 inertia = Mat3::Identity();   // about the centre of mass
};

/// Rigid-body properties of a closed, outward-wound mesh of uniform density.
/// Degenerate meshes fall back to their bounding box.
MassProperties mass_properties(const TriMesh& mesh, double density);

/// Declared defaults with mass = volume x density.
PhysicsParams default_physics(const TriMesh& mesh, double density = 300.0);

}  // namespace sceneforge
