#pragma once

#include <string>
#include <vector>

#include "sceneforge/geom/rigid_transform.hpp"
#include "sceneforge/geom/sdf_grid.hpp"

namespace sceneforge {

/// Closed-form signed distance primitives used for synthetic ground truth.
///
/// Parameters by kind (meters):
///   sphere   {radius}
///   box      {half_x, half_y, half_z}
///   cylinder {radius, half_height}      axis along local z
///   plane    {}                          z = 0, normal +z
///   union    {}                          pointwise min over children
///
/// Every node carries `local`, the pose of its own frame inside the parent
/// frame; children of a union are evaluated through it.
struct AnalyticSdf {
  enum class Kind { sphere, box, cylinder, plane, union_of };

  Kind kind = Kind::sphere;
  std::vector<double> params;
  std::vector<AnalyticSdf> children;
  RigidTransform local;

  static AnalyticSdf sphere(double r, const Vec3& at = Vec3::Zero());
  static AnalyticSdf box(const Vec3& half, const Vec3& at = Vec3::Zero());
  static AnalyticSdf cylinder(double r, double half_h,
                              const Vec3& at = Vec3::Zero());
  static AnalyticSdf plane();
  static AnalyticSdf make_union(std::vector<AnalyticSdf> children);

  /// Signed distance at p given in the parent frame of this node.
  double distance(const Vec3& p) const;
  /// Unit outward normal by central differences of distance().
  Vec3 normal(const Vec3& p, double h = 1e-6) const;
  /// Bounds in the parent frame; planes contribute an empty box.
  Aabb bounds() const;

  /// Throws precondition error when a size parameter is not positive or
  /// the parameter count does not match the kind.
  void validate() const;
};

const char* to_string(AnalyticSdf::Kind kind);
AnalyticSdf::Kind analytic_kind_from_string(const std::string& s);

/// Exact distance to an axis-aligned box centred at the origin.
double box_distance(const Vec3& p, const Vec3& half);

/// Evaluates the analytic distance at every grid node, clamped to
/// +-truncation.
SdfGrid rasterize(const AnalyticSdf& a, const GridSpec& spec);

}  // namespace sceneforge
