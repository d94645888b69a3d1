#include "sceneforge/cli/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "sceneforge/geom/marching_cubes.hpp"
#include "sceneforge/geom/mesh_query.hpp"
#include "sceneforge/physics/mass.hpp"
#include "sceneforge/synth/shapes.hpp"
#include "sceneforge/util/error.hpp"
#include "sceneforge/util/parallel.hpp"
#include "sceneforge/util/rng.hpp"

namespace sceneforge {

using nlohmann::json;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot write " + p.string());
  f << text;
  if (!f) fail(ErrorCode::io, "write failed: " + p.string());
}

// Median height of the background pixels.
std::optional<double> background_height(const std::vector<Observation>& obs) {
  std::vector<double> z;
  for (const auto& o : obs)
    for (int v = 0; v < o.camera.height; v += 2)
      for (int u = 0; u < o.camera.width; u += 2) {
        const auto p = o.pixel(u, v);
        if (o.mask[p] == kBackgroundId && o.depth[p] > 0) z.push_back(o.back_project(u, v).z());
      }
  if (z.empty()) return std::nullopt;
  auto mid = z.begin() + static_cast<std::ptrdiff_t>(z.size() / 2);
  std::nth_element(z.begin(), mid, z.end());
  return *mid;
}

SceneNode floor_at(double z) {
  SceneNode f = floor_node(kBackgroundId);
  f.state.translation.z() = z;
  return f;
}

// Stage-3 surface: the zero level of the final field, moved inward until it
// clears every other body. Nodes whose surface already is the zero level
// are left alone.
std::vector<Stage3Record> reextract(SceneGraph& g, double density) {
  std::vector<Stage3Record> out;
  for (int id : g.object_ids()) {
    SceneNode& n = g.node(id);
    Stage3Record rec{id, 0.0, false};
    const TriMesh zero = marching_cubes(n.sdf);
    if (zero.vertices == n.mesh.vertices && zero.faces == n.mesh.faces) {
      out.push_back(rec);
      continue;
    }
    const TriMesh kept = n.mesh;
    for (double k : {0.0, 0.25, 0.5, 1.0}) {
      const double iso = -k * n.sdf.spacing();
      TriMesh m = k == 0.0 ? zero : marching_cubes(n.sdf, iso);
      if (m.empty()) continue;
      n.mesh = std::move(m);
      if (!intersects_any(g, id)) {
        rec.iso = iso;
        rec.reextracted = true;
        break;
      }
    }
    if (!rec.reextracted) n.mesh = kept;
    else n.physics = default_physics(n.mesh, density);
    out.push_back(rec);
  }
  return out;
}

}  // namespace

std::vector<Observation> render_scene(const SceneSpec& spec, int views) {
  const auto cams = scene_trajectory(spec, views);
  const auto objects = gt_objects(spec);
  std::vector<Observation> out(cams.size());
  for (std::size_t i = 0; i < cams.size(); ++i) out[i] = render_observation(objects, cams[i]);
  return out;
}

void save_observation_set(const std::vector<Observation>& obs, const std::vector<int>& instances,
                          const std::filesystem::path& dir) {
  save_observations(obs, dir);
  write_text(dir / "instances.json", json(instances).dump() + "\n");
}

std::vector<int> load_instance_ids(const std::filesystem::path& dir, const std::vector<Observation>& obs) {
  const auto p = dir / "instances.json";
  std::vector<int> ids;
  if (std::filesystem::exists(p)) {
    std::ifstream f(p, std::ios::binary);
    if (!f) fail(ErrorCode::io, "cannot read " + p.string());
    try {
      ids = json::parse(f).get<std::vector<int>>();
    } catch (const json::exception& e) {
      fail(ErrorCode::parse, p.string() + ": " + e.what());
    }
  } else {
    for (int id : visible_ids(obs))
      if (id != kBackgroundId) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  ids.erase(std::remove(ids.begin(), ids.end(), kBackgroundId), ids.end());
  return ids;
}

PipelineResult run_pipeline(const std::vector<Observation>& obs, const std::vector<int>& instances,
                            const RunConfig& cfg) {
  cfg.validate();
  require(!obs.empty(), "pipeline: no observations");
  require(!instances.empty(), "pipeline: no instances");
  PipelineResult r;

  // Stage 1: per-instance fusion and support structure.
  if (const auto z = background_height(obs)) {
    r.floor_z = *z;
  } else {
    r.warnings.push_back("no background pixels; floor assumed at z = 0");
  }
  FusionOptions fo;
  fo.resolution = cfg.grid_resolution;
  for (int id : instances) {
    r.fused[id] = fuse_instance(obs, id, fo);
    spdlog::info("fused instance {}: observed fraction {:.3f}", id, r.fused[id].observed_fraction);
  }
  const SceneNode floor = floor_at(r.floor_z);
  r.stage1.root = kBackgroundId;
  r.stage1.nodes[kBackgroundId] = floor;
  std::vector<SupportInput> inputs;
  for (const auto& [id, f] : r.fused) {
    SceneNode n;
    n.id = id;
    n.sdf = f.sdf;
    n.mesh = marching_cubes(f.sdf);
    if (n.mesh.empty()) fail(ErrorCode::empty_instance, "instance " + std::to_string(id) + " has no fused surface");
    n.physics = default_physics(n.mesh, cfg.density);
    n.label = "object";
    inputs.push_back({id, n.mesh});
    r.stage1.nodes[id] = std::move(n);
  }
  auto support = infer_support_tree(inputs, {kBackgroundId, transform_mesh(floor.mesh, floor.state)});
  r.stage1.edges = support.graph.edges;
  for (auto& w : support.warnings) r.warnings.push_back(std::move(w));

  // Stage 2: candidates, then the tree search.
  SamplerSpec spec = SamplerSpec::from_config(cfg);
  for (const auto& [id, f] : r.fused) {
    std::vector<const FusedInstance*> others;
    for (const auto& [oid, of] : r.fused)
      if (oid != id) others.push_back(&of);
    CompletionContext ctx;
    ctx.others = others;
    ctx.support_z = estimate_support_z(f, others, r.floor_z);
    auto cs = propose(f, spec, ctx);
    const auto virt = virtual_cameras(f, cfg.virtual_views);
    for (auto& c : cs) c = score(std::move(c), f, obs, virt, cfg);
    std::stable_sort(cs.begin(), cs.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score->weighted < b.score->weighted; });
    r.candidates[id] = std::move(cs);
  }
  SceneGraph topology = support.graph;
  topology.nodes[kBackgroundId] = floor;
  SimOptions sim;
  sim.dt = cfg.sim_dt;
  auto found = tree_search(topology, r.candidates, cfg, sim);
  r.log = std::move(found.log);
  r.graph = std::move(found.graph);

  // Stage 3: surface re-extraction and the final energy.
  r.stage3 = reextract(r.graph, cfg.density);
  r.energy = evaluate(r.graph, obs, cfg, {sim, false});
  for (const auto& w : r.warnings) spdlog::warn("{}", w);
  return r;
}

void write_pipeline_outputs(const PipelineResult& r, const RunConfig& cfg, const std::filesystem::path& dir,
                            const std::optional<MetricReport>& metrics, const std::string& scene_name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + dir.string());
  save_scene(r.graph, dir / "scene");
  save_scene(r.stage1, dir / "stage1");
  for (const auto& [id, cs] : r.candidates) dump_candidates(cs, dir);
  write_text(dir / "energy.json", energy_json(r.energy, cfg) + "\n");
  write_text(dir / "search_log.jsonl", search_log_jsonl(r.log));
  json s3 = json::array();
  for (const auto& s : r.stage3) s3.push_back({{"node", s.node}, {"iso", s.iso}, {"reextracted", s.reextracted}});
  write_text(dir / "stage3.json", s3.dump(2) + "\n");
  if (metrics) {
    write_text(dir / "metrics.json", metric_json(*metrics) + "\n");
    write_text(dir / "metrics.csv", metric_csv_header() + "\n" + metric_csv_row(scene_name, *metrics) + "\n");
  }
}

}  // namespace sceneforge
