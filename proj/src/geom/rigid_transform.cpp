#include "sceneforge/geom/rigid_transform.hpp"

#include <cmath>

namespace sceneforge {

RigidTransform RigidTransform::from_matrix(const Mat4& m) {
  Mat3 r = m.topLeftCorner<3, 3>();
  Quat q(r);
  q.normalize();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  return {q, m.topRightCorner<3, 1>()};
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation.toRotationMatrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

bool RigidTransform::valid() const {
  return std::abs(rotation.norm() - 1.0) <= 1e-9 && translation.allFinite() &&
         rotation.coeffs().allFinite();
}

double rotation_angle(const Quat& q) {
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

}  // namespace sceneforge
