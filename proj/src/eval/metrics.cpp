#include "sceneforge/eval/metrics.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sceneforge/energy/energy.hpp"
#include "sceneforge/geom/io.hpp"
#include "sceneforge/geom/mesh_query.hpp"
#include "sceneforge/kernels/kernels.hpp"
#include "sceneforge/physics/simulator.hpp"
#include "sceneforge/util/error.hpp"
#include "sceneforge/util/parallel.hpp"
#include "sceneforge/util/rng.hpp"

namespace sceneforge {

namespace {

kernels::PointsSoA soa(const std::vector<Vec3>& pts) {
  kernels::PointsSoA s;
  s.reserve(pts.size());
  for (const auto& p : pts) s.push(p.x(), p.y(), p.z());
  return s;
}

struct Directed {
  double mean = 0.0;
  double within = 0.0;  // fraction within tau
  double cos = 0.0;     // mean |cos|
};

Directed directed(const SurfaceSamples& from, const SurfaceSamples& to, double tau) {
  const auto q = soa(from.points), t = soa(to.points);
  std::vector<double> d2(q.size());
  std::vector<std::uint32_t> idx(q.size());
  kernels::nearest_neighbors(q, t, d2, idx);
  Directed r;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double d = std::sqrt(d2[i]);
    r.mean += d;
    hit += d < tau;
    r.cos += std::abs(from.normals[i].dot(to.normals[idx[i]]));
  }
  const double n = static_cast<double>(q.size());
  r.mean /= n;
  r.within = static_cast<double>(hit) / n;
  r.cos /= n;
  return r;
}

}  // namespace

SurfaceMetrics chamfer_f1_nc(const TriMesh& pred, const TriMesh& gt, const MetricOptions& opt) {
  if (pred.empty() || gt.empty()) fail(ErrorCode::undefined_metric, "surface metrics need two nonempty meshes");
  require(opt.tau > 0, "surface metrics: tau must be positive");
  require(opt.samples > 0, "surface metrics: sample count must be positive");
  const auto p = sample_surface(pred, opt.samples, opt.seed);
  const auto g = sample_surface(gt, opt.samples, opt.seed);
  const Directed pg = directed(p, g, opt.tau), gp = directed(g, p, opt.tau);
  SurfaceMetrics m;
  m.cd = 0.5 * (pg.mean + gp.mean);
  m.precision = 100.0 * pg.within;
  m.recall = 100.0 * gp.within;
  m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.nc = 100.0 * 0.5 * (pg.cos + gp.cos);
  return m;
}

double object_recovery(const SceneGraph& pred, const std::vector<int>& gt_ids) {
  require(!gt_ids.empty(), "object_recovery: no ground-truth ids");
  std::size_t found = 0;
  for (int id : gt_ids) found += pred.has(id) && !pred.node(id).mesh.empty();
  return 100.0 * static_cast<double>(found) / static_cast<double>(gt_ids.size());
}

MetricReport scene_report(const SceneGraph& pred, const SceneGraph& gt, const RunConfig& cfg) {
  MetricReport r;
  const auto gt_ids = gt.object_ids();
  r.or_ratio = object_recovery(pred, gt_ids);
  MetricOptions mo;
  mo.samples = static_cast<std::size_t>(cfg.eval_samples);
  mo.tau = cfg.fscore_tau;
  mo.seed = mix_seed(cfg.seed, 0xe7a1);

  auto posed_objects = [](const SceneGraph& g) {
    std::vector<TriMesh> out;
    for (int id : g.object_ids())
      if (!g.node(id).mesh.empty()) out.push_back(transform_mesh(g.node(id).mesh, g.node(id).state));
    return out;
  };
  const auto pm = posed_objects(pred), gm = posed_objects(gt);
  std::vector<const TriMesh*> pp, gp;
  for (const auto& m : pm) pp.push_back(&m);
  for (const auto& m : gm) gp.push_back(&m);
  if (!pp.empty() && !gp.empty()) {
    const auto s = chamfer_f1_nc(merge_meshes(pp), merge_meshes(gp), mo);
    r.cd = 100.0 * s.cd;
    r.f1 = s.f1;
    r.nc = s.nc;
  } else {
    fail(ErrorCode::undefined_metric, "scene_report: no object meshes to compare");
  }

  std::vector<int> common;
  for (int id : gt_ids)
    if (pred.has(id) && !pred.node(id).mesh.empty()) common.push_back(id);
  r.objects.resize(common.size());
  parallel_for(common.size(), [&](std::size_t k) {
    const int id = common[k];
    const auto& a = pred.node(id);
    const auto& b = gt.node(id);
    r.objects[k].id = id;
    r.objects[k].surface = chamfer_f1_nc(transform_mesh(a.mesh, a.state), transform_mesh(b.mesh, b.state), mo);
  });

  SimOptions so;
  so.dt = cfg.sim_dt;
  const auto st = classify_stability(pred, cfg.sim_duration, cfg.stable_translation, cfg.stable_rotation, so);
  std::size_t ground = 0, ground_stable = 0;
  for (auto& o : r.objects) {
    o.stable = st.stable.count(o.id) && st.stable.at(o.id);
    o.on_ground = pred.parent(o.id) == pred.root;
  }
  for (int id : pred.object_ids()) {
    if (pred.parent(id) != pred.root) continue;
    ++ground;
    ground_stable += st.stable.count(id) && st.stable.at(id);
  }
  r.stable_all = st.stable_percent;
  r.stable_ground = ground > 0 ? 100.0 * double(ground_stable) / double(ground) : 100.0;
  r.pene_mesh = static_cast<int>(e_pene_mesh(pred));
  return r;
}

std::string metric_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["cd"] = r.cd;
  j["f1"] = r.f1;
  j["nc"] = r.nc;
  j["stable_ground"] = r.stable_ground;
  j["stable_all"] = r.stable_all;
  j["or_ratio"] = r.or_ratio;
  j["pene_mesh"] = r.pene_mesh;
  j["objects"] = nlohmann::ordered_json::array();
  for (const auto& o : r.objects)
    j["objects"].push_back({{"id", o.id},
                            {"cd", 100.0 * o.surface.cd},
                            {"f1", o.surface.f1},
                            {"nc", o.surface.nc},
                            {"stable", o.stable},
                            {"on_ground", o.on_ground}});
  return j.dump(2);
}

std::string metric_csv_header() { return "scene,cd,f1,nc,stable_ground,stable_all,or_ratio,pene_mesh"; }

std::string metric_csv_row(const std::string& scene, const MetricReport& r) {
  std::ostringstream s;
  s << scene << ',' << format_double(r.cd) << ',' << format_double(r.f1) << ',' << format_double(r.nc) << ','
    << format_double(r.stable_ground) << ',' << format_double(r.stable_all) << ',' << format_double(r.or_ratio)
    << ',' << r.pene_mesh;
  return s.str();
}

}  // namespace sceneforge
