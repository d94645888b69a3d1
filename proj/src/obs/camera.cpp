#include "sceneforge/obs/camera.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "sceneforge/util/error.hpp"

namespace sceneforge {

bool Camera::valid() const {
  return fx > 0 && fy > 0 && width > 0 && height > 0 && cx >= 0 && cx < width && cy >= 0 &&
         cy < height && world_from_camera.valid();
}

Vec3 Camera::ray(double u, double v) const {
  const Vec3 d((u - cx) / fx, (v - cy) / fy, 1.0);
  return world_from_camera.rotate(d.normalized());
}

Camera look_at(const Vec3& eye, const Vec3& target, const Camera& intrinsics) {
  const Vec3 f = (target - eye).normalized();
  Vec3 up = Vec3::UnitZ();
  if (std::abs(f.dot(up)) > 0.999) up = Vec3::UnitY();
  const Vec3 r = f.cross(up).normalized();
  const Vec3 down = f.cross(r);
  Mat3 m;
  m.col(0) = r;
  m.col(1) = down;
  m.col(2) = f;
  Camera cam = intrinsics;
  cam.world_from_camera = {Quat(m).normalized(), eye};
  return cam;
}

std::vector<Camera> ring_cameras(const Vec3& center, double radius, int count,
                                 double elevation, const Camera& intrinsics) {
  std::vector<Camera> out;
  for (int i = 0; i < count; ++i) {
    const double az = 2 * std::numbers::pi * i / count;
    const Vec3 eye = center + radius * Vec3(std::cos(elevation) * std::cos(az),
                                            std::cos(elevation) * std::sin(az),
                                            std::sin(elevation));
    out.push_back(look_at(eye, center, intrinsics));
  }
  return out;
}

std::vector<Camera> orbit_trajectory(const Vec3& center, double radius, int count,
                                     const Camera& intrinsics) {
  require(count >= 1, "orbit_trajectory: count must be positive");
  constexpr double deg = std::numbers::pi / 180.0;
  const int arc = count / 3;
  const int ring = count - arc;
  auto out = ring_cameras(center, radius, ring, 25 * deg, intrinsics);
  for (int i = 0; i < arc; ++i) {
    const double s = arc == 1 ? 0.5 : static_cast<double>(i) / (arc - 1);
    const double el = (45 + 30 * s) * deg;
    // Offset from the ring azimuths so the arc fills the gaps.
    const double az = 2 * std::numbers::pi * (i + 0.5) / std::max(arc, 1);
    const Vec3 eye = center + radius * Vec3(std::cos(el) * std::cos(az),
                                            std::cos(el) * std::sin(az), std::sin(el));
    out.push_back(look_at(eye, center, intrinsics));
  }
  return out;
}

std::string camera_json(const Camera& cam) {
  const Mat4 m = cam.world_from_camera.matrix();
  std::vector<double> rows;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) rows.push_back(m(r, c));
  nlohmann::json j = {{"fx", cam.fx},         {"fy", cam.fy},
                      {"cx", cam.cx},         {"cy", cam.cy},
                      {"width", cam.width},   {"height", cam.height},
                      {"world_from_camera", rows}};
  return j.dump(2) + "\n";
}

Camera camera_from_json(const std::string& text, const std::string& name) {
  Camera cam;
  try {
    const auto j = nlohmann::json::parse(text);
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    const auto rows = j.at("world_from_camera").get<std::vector<double>>();
    if (rows.size() != 16) fail(ErrorCode::parse, name + ": world_from_camera needs 16 values");
    Mat4 m;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) m(r, c) = rows[4 * r + c];
    cam.world_from_camera = RigidTransform::from_matrix(m);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, name + ": " + e.what());
  }
  if (!cam.valid()) fail(ErrorCode::parse, name + ": invalid camera");
  return cam;
}

}  // namespace sceneforge
