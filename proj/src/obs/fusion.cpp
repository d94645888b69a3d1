#include "sceneforge/obs/fusion.hpp"

#include <cmath>
#include <deque>
#include <set>

#include "sceneforge/util/error.hpp"
#include "sceneforge/util/parallel.hpp"

namespace sceneforge {

namespace {

// Samples are accumulated as integers so that the average does not depend
// on the order of the observations.
constexpr double kFixedScale = double(1 << 24);

struct ViewCache {
  const Observation* obs;
  RigidTransform cam_from_world;
  Vec3 center;
  std::vector<Vec3f> normals;  // observation normals or estimates
};

GridSpec place_grid(const std::vector<Vec3>& pts, const std::vector<Observation>& obs, int id,
                    const FusionOptions& opt) {
  Aabb box;
  for (const auto& p : pts) box.extend(p);
  const double ext = std::max(box.extent().maxCoeff(), 1e-3);
  const double pad = opt.padding * ext;
  const double side = ext + 2 * pad;

  // Mean viewing direction: slack on short axes goes behind the observed
  // surface, where the unobserved part of the object lies.
  Vec3 view = Vec3::Zero();
  const Vec3 c = box.center();
  for (const auto& o : obs) {
    bool sees = false;
    for (auto m : o.mask)
      if (m == id) {
        sees = true;
        break;
      }
    if (sees) view += (c - o.camera.center()).normalized();
  }
  if (view.norm() > 0) view.normalize();

  GridSpec s;
  const int n = opt.resolution;
  s.dims = {n, n, n};
  s.spacing = side / (n - 1);
  s.truncation = opt.truncation_voxels * s.spacing;
  for (int a = 0; a < 3; ++a) {
    const double slack = side - box.extent()[a] - 2 * pad;
    s.origin[a] = box.min[a] - pad - slack * (0.5 - 0.5 * view[a]);
  }
  return s;
}

}  // namespace

std::vector<int> visible_ids(const std::vector<Observation>& obs) {
  std::set<int> ids;
  for (const auto& o : obs)
    for (std::size_t i = 0; i < o.mask.size(); ++i)
      if (o.mask[i] != kEmptyLabel && o.depth[i] > 0) ids.insert(o.mask[i]);
  return {ids.begin(), ids.end()};
}

FusedInstance fuse_instance(const std::vector<Observation>& obs, int id,
                            const FusionOptions& opt) {
  require(opt.resolution >= 8, "fuse_instance: resolution too small");
  std::vector<Vec3> pts;
  for (const auto& o : obs)
    for (int v = 0; v < o.camera.height; ++v)
      for (int u = 0; u < o.camera.width; ++u) {
        const std::size_t px = o.pixel(u, v);
        if (o.mask[px] == id && o.depth[px] > 0) pts.push_back(o.back_project(u, v));
      }
  if (pts.empty())
    fail(ErrorCode::empty_instance, "instance " + std::to_string(id) + " is not visible in any observation");

  FusedInstance out;
  out.id = id;
  const GridSpec spec = opt.grid ? *opt.grid : place_grid(pts, obs, id, opt);
  require(spec.valid(), "fuse_instance: invalid grid");
  const double trunc = spec.truncation;

  std::vector<ViewCache> views;
  for (const auto& o : obs)
    views.push_back({&o, o.camera.camera_from_world(), o.camera.center(),
                     o.normal.empty() ? estimate_normals(o) : o.normal});

  SdfGrid grid(spec, true);
  out.carved.assign(grid.size(), 0);
  auto values = grid.values_mut();
  auto weights = grid.weights_mut();
  parallel_for(grid.size(), [&](std::size_t idx) {
    const Vec3 x = grid.point(idx);
    std::int64_t sum = 0;
    int count = 0;
    bool carved = false;
    for (const auto& view : views) {
      const Observation& o = *view.obs;
      const Vec3 pc = view.cam_from_world.apply(x);
      if (pc.z() <= 1e-9) continue;
      const auto [fu, fv] = o.camera.project(pc);
      const long iu = std::lround(fu), iv = std::lround(fv);
      if (iu < 0 || iv < 0 || iu >= o.camera.width || iv >= o.camera.height) continue;
      const std::size_t px = o.pixel(static_cast<int>(iu), static_cast<int>(iv));
      const double depth = o.depth[px];
      const double r = pc.norm();
      if (o.mask[px] != id || depth <= 0) {
        if (depth <= 0 || r < depth - spec.spacing) carved = true;
        continue;
      }
      const double s = depth - r;
      if (s < -trunc) continue;
      if (s > trunc) {
        carved = true;
        continue;
      }
      // Point-to-plane distance to the surface seen at this pixel.
      const Vec3 hit = view.center + depth * o.camera.ray(static_cast<double>(iu), static_cast<double>(iv));
      const Vec3 n = view.normals[px].cast<double>();
      const double val = std::clamp(n.squaredNorm() > 0 ? n.dot(x - hit) : s, -trunc, trunc);
      sum += std::llround(val / trunc * kFixedScale);
      ++count;
    }
    if (count > 0) {
      values[idx] = static_cast<float>(trunc * (static_cast<double>(sum) / count) / kFixedScale);
      weights[idx] = static_cast<float>(count);
    }
    out.carved[idx] = carved;
  });

  // Unobserved voxels that cannot be reached from known empty space or the
  // grid boundary without crossing the observed inside are enclosed.
  const auto& d = spec.dims;
  std::vector<std::uint8_t> reach(grid.size(), 0);
  std::deque<std::size_t> queue;
  auto passable = [&](std::size_t i) { return weights[i] == 0 || values[i] > 0; };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto c = grid.coords(i);
    const bool border = c[0] == 0 || c[1] == 0 || c[2] == 0 || c[0] == d[0] - 1 ||
                        c[1] == d[1] - 1 || c[2] == d[2] - 1;
    if (passable(i) && (border || out.carved[i])) {
      reach[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const auto c = grid.coords(i);
    for (int a = 0; a < 3; ++a)
      for (int sgn : {-1, 1}) {
        auto n = c;
        n[a] += sgn;
        if (n[a] < 0 || n[a] >= d[a]) continue;
        const std::size_t j = grid.index(n[0], n[1], n[2]);
        if (!reach[j] && passable(j)) {
          reach[j] = 1;
          queue.push_back(j);
        }
      }
  }
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!reach[i] && weights[i] == 0) {
      values[i] = static_cast<float>(-trunc);
      weights[i] = 1.0f;
    }

  // Near-surface voxels: observed band voxels plus unknown voxels next to
  // the band.
  std::size_t band = 0, frontier = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (weights[i] > 0) {
      if (std::abs(values[i]) < trunc) ++band;
      continue;
    }
    const auto c = grid.coords(i);
    bool borders_band = false;
    for (int a = 0; a < 3 && !borders_band; ++a)
      for (int sgn : {-1, 1}) {
        auto n = c;
        n[a] += sgn;
        if (n[a] < 0 || n[a] >= d[a]) continue;
        const std::size_t j = grid.index(n[0], n[1], n[2]);
        if (weights[j] > 0 && std::abs(values[j]) < trunc) {
          borders_band = true;
          break;
        }
      }
    frontier += borders_band;
  }
  out.observed_fraction = band + frontier == 0 ? 0.0 : double(band) / double(band + frontier);

  const std::size_t stride = std::max<std::size_t>(1, pts.size() / 20000);
  for (std::size_t i = 0; i < pts.size(); i += stride) out.points.push_back(pts[i]);
  out.sdf = std::move(grid);
  return out;
}

}  // namespace sceneforge
