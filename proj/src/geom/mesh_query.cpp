#include "sceneforge/geom/mesh_query.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sceneforge/kernels/kernels.hpp"
#include "sceneforge/util/error.hpp"
#include "sceneforge/util/rng.hpp"

namespace sceneforge {

SurfaceSamples sample_surface(const TriMesh& mesh, std::size_t count,
                              std::uint64_t seed) {
  SurfaceSamples out;
  if (mesh.faces.empty() || count == 0) return out;
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    total += mesh.face_area(f);
    cumulative[f] = total;
  }
  if (!(total > 0)) return out;
  Rng rng(seed);
  out.points.reserve(count);
  out.normals.reserve(count);
  out.area.assign(count, total / static_cast<double>(count));
  for (std::size_t s = 0; s < count; ++s) {
    const double pick = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const std::size_t f =
        std::min<std::size_t>(it - cumulative.begin(), mesh.faces.size() - 1);
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const auto& t = mesh.faces[f];
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    out.points.push_back((1 - r1) * a + r1 * (1 - r2) * b + r1 * r2 * c);
    out.normals.push_back(mesh.face_normal(f));
  }
  return out;
}

bool mesh_intersects(const MeshBvh& a, const MeshBvh& b) {
  if (a.empty() || b.empty()) return false;
  if (!a.bounds().overlaps(b.bounds())) return false;
  return a.intersects(b);
}

bool mesh_intersects(const TriMesh& a, const TriMesh& b) {
  if (a.empty() || b.empty()) return false;
  if (!a.bounds().overlaps(b.bounds())) return false;
  return mesh_intersects(MeshBvh(a), MeshBvh(b));
}

namespace {

kernels::PointsSoA to_soa(const std::vector<Vec3>& pts) {
  kernels::PointsSoA s;
  s.reserve(pts.size());
  for (const auto& p : pts) s.push(p.x(), p.y(), p.z());
  return s;
}

double mean_nearest(const kernels::PointsSoA& from, const kernels::PointsSoA& to) {
  std::vector<double> d2(from.size());
  std::vector<std::uint32_t> idx(from.size());
  kernels::nearest_neighbors(from, to, d2, idx);
  double sum = 0;
  for (double v : d2) sum += std::sqrt(v);
  return sum / static_cast<double>(from.size());
}

}  // namespace

double mesh_distance(const TriMesh& a, const TriMesh& b,
                     const MeshDistanceOptions& opt) {
  require(!a.empty() && !b.empty(), "mesh_distance: empty mesh");
  // Both sides share the seed so identical meshes sample identically.
  const auto sa = to_soa(sample_surface(a, opt.samples, opt.seed).points);
  const auto sb = to_soa(sample_surface(b, opt.samples, opt.seed).points);
  require(sa.size() > 0 && sb.size() > 0, "mesh_distance: zero-area mesh");
  return 0.5 * (mean_nearest(sa, sb) + mean_nearest(sb, sa));
}

double directed_min_separation(const TriMesh& a, const MeshBvh& b,
                               const MeshDistanceOptions& opt) {
  require(!a.empty() && !b.empty(), "min_separation: empty mesh");
  double best = std::numeric_limits<double>::infinity();
  auto visit = [&](const Vec3& p) {
    // Cheap reject against the target bounds before the exact query.
    if (b.bounds().distance2(p) >= best * best) return;
    if (auto c = b.closest(p, best)) best = std::min(best, std::sqrt(c->distance2));
  };
  for (const auto& v : a.vertices) visit(v);
  for (const auto& p : sample_surface(a, opt.samples, opt.seed).points) visit(p);
  return best;
}

double min_separation(const TriMesh& a, const TriMesh& b,
                      const MeshDistanceOptions& opt) {
  const MeshBvh ba(a), bb(b);
  if (mesh_intersects(ba, bb)) return 0.0;
  return std::min(directed_min_separation(a, bb, opt),
                  directed_min_separation(b, ba, opt));
}

}  // namespace sceneforge
