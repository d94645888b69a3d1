#pragma once

#include <string>

#include "sceneforge/geom/analytic.hpp"
#include "sceneforge/scene/scene_graph.hpp"

namespace sceneforge {

/// Object node from an analytic shape given in its own frame: SDF sampled
/// at `spacing` over the padded shape bounds, mesh by marching cubes,
/// default physics with mass from volume.
SceneNode node_from_shape(int id, const AnalyticSdf& shape, const RigidTransform& pose,
                          double spacing, double density = 300.0, const std::string& label = "");

/// Static floor slab with its top face at z = 0. The mesh is the exact box.
SceneNode floor_node(int id, double half_size = 2.0, double thickness = 0.1,
                     double spacing = 0.02);

}  // namespace sceneforge
