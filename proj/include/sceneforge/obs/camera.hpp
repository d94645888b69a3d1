#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sceneforge/geom/rigid_transform.hpp"

namespace sceneforge {

/// Pinhole camera, OpenCV axes (x right, y down, z forward). Pixel (u, v)
/// has its centre at image coordinate (u, v).
struct Camera {
  double fx = 280.0, fy = 280.0;
  double cx = 159.5, cy = 119.5;
  int width = 320, height = 240;
  RigidTransform world_from_camera;

  bool valid() const;
  RigidTransform camera_from_world() const { return world_from_camera.inverse(); }
  Vec3 center() const { return world_from_camera.translation; }
  /// Unit ray direction in world coordinates through image point (u, v).
  Vec3 ray(double u, double v) const;
  /// Image coordinates of a camera-frame point with z > 0.
  std::pair<double, double> project(const Vec3& p_cam) const {
    return {fx * p_cam.x() / p_cam.z() + cx, fy * p_cam.y() / p_cam.z() + cy};
  }

  bool operator==(const Camera&) const = default;
};

/// Camera at eye looking at target with world +z as the up hint.
Camera look_at(const Vec3& eye, const Vec3& target, const Camera& intrinsics = {});

/// Inward-facing trajectory around center: two thirds of the views on a
/// ring at 25 degrees elevation, the rest on an arc between 45 and 75
/// degrees.
std::vector<Camera> orbit_trajectory(const Vec3& center, double radius, int count,
                                     const Camera& intrinsics = {});

/// Ring of `count` cameras at the given elevation (radians) looking at
/// center.
std::vector<Camera> ring_cameras(const Vec3& center, double radius, int count,
                                 double elevation, const Camera& intrinsics = {});

std::string camera_json(const Camera& cam);
Camera camera_from_json(const std::string& text, const std::string& name);

}  // namespace sceneforge
