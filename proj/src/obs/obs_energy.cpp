#include "sceneforge/obs/obs_energy.hpp"

#include <cmath>

#include "sceneforge/util/error.hpp"
#include "sceneforge/util/parallel.hpp"

namespace sceneforge {

void ObsTermSums::add(const ObsTermSums& o) {
  mask += o.mask;
  mask_pixels += o.mask_pixels;
  depth += o.depth;
  depth_pixels += o.depth_pixels;
  normal += o.normal;
  normal_pixels += o.normal_pixels;
}

double ObsTermSums::mask_mean() const { return mask_pixels ? mask / mask_pixels : 0.0; }

double ObsTermSums::depth_mean() const {
  if (depth_pixels == 0) fail(ErrorCode::undefined_energy, "depth energy: no jointly valid pixels");
  return depth / depth_pixels;
}

double ObsTermSums::normal_mean() const { return normal_pixels ? normal / normal_pixels : 0.0; }

ObsTermSums compare_images(const Observation& observed, const std::vector<Vec3f>& observed_normals,
                           const Observation& rendered, std::optional<int> only_label) {
  require(observed.pixels() == rendered.pixels(), "compare_images: size mismatch");
  const double match = -std::log(1.0 - kMaskEpsilon);
  const double mismatch = -std::log(kMaskEpsilon);
  const bool with_normals = !observed_normals.empty() && !rendered.normal.empty();
  ObsTermSums s;
  for (std::size_t i = 0; i < observed.pixels(); ++i) {
    const int lo = observed.mask[i], lr = rendered.mask[i];
    if (only_label && lo != *only_label && lr != *only_label) continue;
    s.mask += lo == lr ? match : mismatch;
    ++s.mask_pixels;
    const double d_o = observed.depth[i], d_r = rendered.depth[i];
    if (d_o <= 0 || d_r <= 0) continue;
    s.depth += (d_o - d_r) * (d_o - d_r);
    ++s.depth_pixels;
    if (!with_normals) continue;
    const Vec3f& a = observed_normals[i];
    const Vec3f& b = rendered.normal[i];
    if (a.squaredNorm() == 0 || b.squaredNorm() == 0) continue;
    s.normal += 1.0 - double(a.dot(b));
    ++s.normal_pixels;
  }
  return s;
}

MeshScene posed_meshes(const SceneGraph& g) {
  MeshScene scene;
  for (const auto& [id, n] : g.nodes)
    if (!n.mesh.empty()) scene.add(id, transform_mesh(n.mesh, n.state));
  return scene;
}

namespace {

ObsTermSums terms(const SceneGraph& g, const Observation& obs) {
  const auto rendered = render_meshes(posed_meshes(g), obs.camera);
  const auto normals = obs.normal.empty() ? estimate_normals(obs) : obs.normal;
  return compare_images(obs, normals, rendered);
}

}  // namespace

ObsTermSums observation_terms(const SceneGraph& g, const std::vector<Observation>& obs) {
  const MeshScene scene = posed_meshes(g);
  std::vector<ObsTermSums> per_view(obs.size());
  parallel_for(obs.size(), [&](std::size_t v) {
    const auto rendered = render_meshes(scene, obs[v].camera);
    const auto normals = obs[v].normal.empty() ? estimate_normals(obs[v]) : obs[v].normal;
    per_view[v] = compare_images(obs[v], normals, rendered);
  });
  ObsTermSums total;
  for (const auto& t : per_view) total.add(t);
  return total;
}

double mask_energy(const SceneGraph& g, const Observation& obs) {
  return terms(g, obs).mask_mean();
}

double depth_energy(const SceneGraph& g, const Observation& obs) {
  return terms(g, obs).depth_mean();
}

double normal_energy(const SceneGraph& g, const Observation& obs) {
  return terms(g, obs).normal_mean();
}

}  // namespace sceneforge
