#include "sceneforge/energy/energy.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "sceneforge/geom/mesh_query.hpp"
#include "sceneforge/obs/obs_energy.hpp"
#include "sceneforge/util/error.hpp"
#include "sceneforge/util/parallel.hpp"
#include "sceneforge/util/rng.hpp"

namespace sceneforge {

void EnergyReport::weigh(const RunConfig& cfg) {
  weighted_total = cfg.lambda_mask * mask + cfg.lambda_depth * depth + cfg.lambda_normal * normal +
                   cfg.lambda_pene * (pene_sdf + pene_mesh) + cfg.lambda_touch * touch +
                   cfg.lambda_stable * stable;
}

namespace {

struct PosedField {
  const SdfGrid* sdf;
  RigidTransform object_from_world;
  Aabb world_box;

  double at(const Vec3& world) const {
    if (!world_box.contains(world)) return sdf->truncation();
    return sdf->sample(object_from_world.apply(world));
  }
};

Aabb world_box(const SdfGrid& s, const RigidTransform& t) {
  const Aabb b = s.bounds();
  Aabb out;
  for (int c = 0; c < 8; ++c)
    out.extend(t.apply(Vec3(c & 1 ? b.max.x() : b.min.x(), c & 2 ? b.max.y() : b.min.y(),
                            c & 4 ? b.max.z() : b.min.z())));
  return out;
}

}  // namespace

double e_pene_sdf(const SceneGraph& g) {
  std::vector<PosedField> fields;
  for (const auto& [id, n] : g.nodes)
    if (n.sdf.size() > 0) fields.push_back({&n.sdf, n.state.inverse(), world_box(n.sdf, n.state)});
  if (fields.size() < 2) return 0.0;

  const std::size_t m = fields.size();
  std::vector<double> sum(m, 0.0), volume(m, 0.0);
  parallel_for(m, [&](std::size_t k) {
    const SdfGrid& s = *fields[k].sdf;
    const RigidTransform world_from_object = fields[k].object_from_world.inverse();
    const double h = s.spacing();
    const double vox = h * h * h;
    const auto& d = s.dims();
    // Cells that can reach the band: band nodes dilated by one node.
    std::vector<std::uint8_t> near(s.size(), 0);
    for (int z = 0; z < d[2]; ++z)
      for (int y = 0; y < d[1]; ++y)
        for (int x = 0; x < d[0]; ++x) {
          if (std::abs(s.at(x, y, z)) >= s.truncation()) continue;
          for (int dz = std::max(z - 1, 0); dz <= std::min(z + 1, d[2] - 1); ++dz)
            for (int dy = std::max(y - 1, 0); dy <= std::min(y + 1, d[1] - 1); ++dy)
              for (int dx = std::max(x - 1, 0); dx <= std::min(x + 1, d[0] - 1); ++dx)
                near[s.index(dx, dy, dz)] = 1;
        }
    std::vector<double> values(m);
    for (std::size_t idx = 0; idx < s.size(); ++idx) {
      if (!near[idx]) continue;
      // One jittered point per cell breaks the alignment between the lattice
      // and the surfaces it integrates over.
      const std::uint64_t r = mix_seed(k, idx);
      const Vec3 jitter(static_cast<double>(r & 0xfffff) / 0x100000 - 0.5,
                        static_cast<double>((r >> 20) & 0xfffff) / 0x100000 - 0.5,
                        static_cast<double>((r >> 40) & 0xfffff) / 0x100000 - 0.5);
      const Vec3 local = s.point(idx) + h * jitter;
      values[k] = s.sample(local);
      if (std::abs(values[k]) >= s.truncation()) continue;
      const Vec3 x = world_from_object.apply(local);
      bool owned_lower = false;
      for (std::size_t j = 0; j < m; ++j) {
        if (j == k) continue;
        values[j] = fields[j].at(x);
        if (j < k && std::abs(values[j]) < fields[j].sdf->truncation()) owned_lower = true;
      }
      if (owned_lower) continue;
      const std::size_t owner = std::min_element(values.begin(), values.end()) - values.begin();
      double hinge = 0;
      for (std::size_t j = 0; j < m; ++j)
        if (j != owner) hinge += std::max(0.0, -values[j] - values[owner]);
      sum[k] += vox * hinge;
      volume[k] += vox;
    }
  });
  double total = 0, vol = 0;
  for (std::size_t k = 0; k < m; ++k) {
    total += sum[k];
    vol += volume[k];
  }
  return vol > 0 ? total / vol : 0.0;
}

std::vector<std::pair<int, int>> intersecting_pairs(const SceneGraph& g) {
  std::vector<int> ids;
  std::vector<MeshBvh> bvhs;
  for (const auto& [id, n] : g.nodes) {
    if (n.mesh.empty()) continue;
    ids.push_back(id);
    bvhs.emplace_back(transform_mesh(n.mesh, n.state));
  }
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b)
      if (bvhs[a].bounds().overlaps(bvhs[b].bounds()) && mesh_intersects(bvhs[a], bvhs[b]))
        pairs.emplace_back(ids[a], ids[b]);
  return pairs;
}

double e_pene_mesh(const SceneGraph& g) {
  return static_cast<double>(intersecting_pairs(g).size());
}

EnergyReport evaluate(const SceneGraph& g, const std::vector<Observation>& obs, const RunConfig& cfg,
                      const EvaluateOptions& opt) {
  require(!obs.empty(), "evaluate: no observations");
  EnergyReport r;
  const ObsTermSums t = observation_terms(g, obs);
  r.mask = t.mask_mean();
  r.depth = t.depth_mean();
  r.normal = t.normal_mean();
  r.pene_sdf = e_pene_sdf(g);
  r.pene_mesh = e_pene_mesh(g);
  r.touch = e_touch(g);
  if (!opt.skip_stable) {
    SimOptions so = opt.sim;
    so.dt = cfg.sim_dt;
    r.stable = e_stable(g, cfg.sim_duration, so);
  }
  r.weigh(cfg);
  return r;
}

std::string energy_json(const EnergyReport& r, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["mask"] = r.mask;
  j["depth"] = r.depth;
  j["normal"] = r.normal;
  j["pene_sdf"] = r.pene_sdf;
  j["pene_mesh"] = r.pene_mesh;
  j["touch"] = r.touch;
  j["stable"] = r.stable;
  j["weights"] = {{"mask", cfg.lambda_mask},   {"depth", cfg.lambda_depth}, {"normal", cfg.lambda_normal},
                  {"pene", cfg.lambda_pene},   {"touch", cfg.lambda_touch}, {"stable", cfg.lambda_stable}};
  j["total"] = r.weighted_total;
  return j.dump(2);
}

}  // namespace sceneforge
