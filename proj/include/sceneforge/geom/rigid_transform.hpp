#pragma once

#include "sceneforge/geom/types.hpp"

namespace sceneforge {

/// Rotation (unit quaternion, wxyz) followed by translation. Maps object
/// coordinates to world coordinates.
struct RigidTransform {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) {
    return {Quat::Identity(), t};
  }
  static RigidTransform from_matrix(const Mat4& m);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 rotate(const Vec3& v) const { return rotation * v; }

  RigidTransform inverse() const {
    Quat inv = rotation.conjugate();
    return {inv, -(inv * translation)};
  }

  /// (this * o).apply(p) == this->apply(o.apply(p))
  RigidTransform operator*(const RigidTransform& o) const {
    return {rotation * o.rotation, rotation * o.translation + translation};
  }

  Mat4 matrix() const;
  bool valid() const;

  bool operator==(const RigidTransform& o) const {
    return rotation.coeffs() == o.rotation.coeffs() &&
           translation == o.translation;
  }
};

/// Angle of a unit quaternion in [0, pi].
double rotation_angle(const Quat& q);

}  // namespace sceneforge
