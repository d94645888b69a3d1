#include "sceneforge/synth/shapes.hpp"

#include <cmath>

#include "sceneforge/geom/marching_cubes.hpp"
#include "sceneforge/physics/mass.hpp"
#include "sceneforge/util/error.hpp"

namespace sceneforge {

namespace {

GridSpec grid_around(const Aabb& box, double spacing) {
  GridSpec s;
  s.spacing = spacing;
  s.truncation = 4 * spacing;
  const double pad = s.truncation + 2 * spacing;
  s.origin = box.min - Vec3::Constant(pad);
  const Vec3 ext = box.extent() + Vec3::Constant(2 * pad);
  for (int a = 0; a < 3; ++a) s.dims[a] = static_cast<int>(std::ceil(ext[a] / spacing)) + 1;
  return s;
}

}  // namespace

SceneNode node_from_shape(int id, const AnalyticSdf& shape, const RigidTransform& pose,
                          double spacing, double density, const std::string& label) {
  shape.validate();
  const Aabb box = shape.bounds();
  require(!box.empty(), "node_from_shape: unbounded shape");
  SceneNode n;
  n.id = id;
  n.label = label;
  n.sdf = rasterize(shape, grid_around(box, spacing));
  n.mesh = marching_cubes(n.sdf);
  n.state = pose;
  n.physics = default_physics(n.mesh, density);
  return n;
}

SceneNode floor_node(int id, double half_size, double thickness, double spacing) {
  const Vec3 half(half_size, half_size, 0.5 * thickness);
  const auto shape = AnalyticSdf::box(half, Vec3(0, 0, -0.5 * thickness));
  SceneNode n;
  n.id = id;
  n.label = "floor";
  n.sdf = rasterize(shape, grid_around(shape.bounds(), spacing));
  n.mesh = make_box_mesh(half, 1);
  for (auto& v : n.mesh.vertices) v.z() -= 0.5 * thickness;
  n.physics.mass = 1e6;
  return n;
}

}  // namespace sceneforge
