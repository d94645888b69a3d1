#include "sceneforge/search/search.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "sceneforge/energy/energy.hpp"
#include "sceneforge/geom/marching_cubes.hpp"
#include "sceneforge/geom/mesh_query.hpp"
#include "sceneforge/physics/mass.hpp"
#include "sceneforge/util/error.hpp"
#include "sceneforge/util/log.hpp"
#include "sceneforge/util/parallel.hpp"

namespace sceneforge {

namespace {

Vec3 triangle_normal(const std::array<Vec3, 3>& t) {
  const Vec3 n = (t[1] - t[0]).cross(t[2] - t[0]);
  const double len = n.norm();
  return len > 0 ? Vec3(n / len) : Vec3::Zero();
}

double centroid_z(const TriMesh& m) {
  const auto mp = mass_properties(m, 1.0);
  return mp.com.z();
}

}  // namespace

SupportInference infer_support_tree(const std::vector<SupportInput>& instances, const SupportInput& background,
                                    const SupportOptions& opt) {
  require(!background.mesh.empty(), "infer_support_tree: background mesh missing");
  std::vector<const SupportInput*> all{&background};
  std::set<int> ids{background.id};
  for (const auto& in : instances) {
    require(!in.mesh.empty(), "infer_support_tree: instance " + std::to_string(in.id) + " has no mesh");
    require(ids.insert(in.id).second, "infer_support_tree: duplicate id " + std::to_string(in.id));
    all.push_back(&in);
  }
  std::vector<MeshBvh> bvh(all.size());
  parallel_for(all.size(), [&](std::size_t i) { bvh[i] = MeshBvh(all[i]->mesh); });

  SupportInference out;
  out.graph.root = background.id;
  for (const auto* in : all) {
    SceneNode n;
    n.id = in->id;
    n.mesh = in->mesh;
    out.graph.nodes[in->id] = std::move(n);
  }

  std::vector<SupportHypothesis> best(all.size());
  std::vector<bool> found(all.size(), false);
  parallel_for(all.size(), [&](std::size_t c) {
    if (c == 0) return;
    const auto samples = sample_surface(all[c]->mesh, opt.samples, 0x5077 + std::uint64_t(all[c]->id));
    for (std::size_t p = 0; p < all.size(); ++p) {
      if (p == c) continue;
      SupportHypothesis h{all[c]->id, all[p]->id, 0.0, Vec3::Zero(), 0.0, 0.0};
      double height = 0, gap = 0;
      for (std::size_t s = 0; s < samples.points.size(); ++s) {
        if (samples.normals[s].z() > -0.3) continue;
        const Vec3& x = samples.points[s];
        const Vec3 from = x + Vec3(0, 0, opt.max_embed);
        const auto hit = bvh[p].raycast(from, -Vec3::UnitZ(), 0.0, opt.max_embed + opt.max_gap);
        if (!hit) continue;
        const Vec3 n = triangle_normal(bvh[p].triangle(hit->face));
        if (n.z() < opt.min_up_cos) continue;
        const double hz = from.z() - hit->t;
        const double a = samples.area[s];
        h.area += a;
        h.normal += a * n;
        height += a * hz;
        gap += a * (x.z() - hz);
      }
      if (h.area <= 0) continue;
      h.normal.normalize();
      h.height = height / h.area;
      h.gap = gap / h.area;
      const bool better = !found[c] || h.area > best[c].area ||
                          (h.area == best[c].area &&
                           (std::abs(h.gap) < std::abs(best[c].gap) ||
                            (std::abs(h.gap) == std::abs(best[c].gap) && h.parent < best[c].parent)));
      if (better) {
        best[c] = h;
        found[c] = true;
      }
    }
  });

  std::map<int, int> parent;
  std::map<int, double> com_z;
  for (std::size_t c = 1; c < all.size(); ++c) {
    parent[all[c]->id] = found[c] ? best[c].parent : background.id;
    com_z[all[c]->id] = centroid_z(all[c]->mesh);
  }
  // Break mutual support: walk each chain, cut cycles at their lowest node.
  for (std::size_t c = 1; c < all.size(); ++c) {
    std::vector<int> path;
    int cur = all[c]->id;
    while (cur != background.id) {
      const auto it = std::find(path.begin(), path.end(), cur);
      if (it != path.end()) {
        int lowest = *it;
        for (auto j = it; j != path.end(); ++j)
          if (com_z[*j] < com_z[lowest] || (com_z[*j] == com_z[lowest] && *j < lowest)) lowest = *j;
        parent[lowest] = background.id;
        out.warnings.push_back("cyclic support evidence; node " + std::to_string(lowest) +
                               " attached to the background");
        spdlog::warn("{}", out.warnings.back());
        path.clear();
        cur = all[c]->id;
        continue;
      }
      path.push_back(cur);
      cur = parent[cur];
    }
  }
  for (std::size_t c = 1; c < all.size(); ++c) {
    const int id = all[c]->id;
    out.graph.edges.push_back({id, parent[id], RelationKind::support});
    if (found[c] && best[c].parent == parent[id]) out.chosen.push_back(best[c]);
  }
  for (std::size_t a = 1; a < all.size(); ++a)
    for (std::size_t b = a + 1; b < all.size(); ++b) {
      if (parent[all[a]->id] != parent[all[b]->id]) continue;
      if (!bvh[a].bounds().inflated(opt.beside_distance).overlaps(bvh[b].bounds())) continue;
      if (min_separation(all[a]->mesh, all[b]->mesh) <= opt.beside_distance)
        out.graph.edges.push_back({all[a]->id, all[b]->id, RelationKind::beside});
    }
  return out;
}

SceneNode install_candidate(const Candidate& c, int id, double density) {
  SceneNode n;
  n.id = id;
  n.sdf = c.sdf;
  n.mesh = c.mesh;
  n.state = c.pose;
  n.physics = default_physics(c.mesh, density);
  n.label = "object";
  return n;
}

namespace {

struct Other {
  int id;
  const SceneNode* node;
  RigidTransform object_from_world;
  Aabb world_box;
};

Aabb posed_box(const Aabb& b, const RigidTransform& t) {
  Aabb out;
  for (int c = 0; c < 8; ++c)
    out.extend(t.apply(Vec3(c & 1 ? b.max.x() : b.min.x(), c & 2 ? b.max.y() : b.min.y(),
                            c & 4 ? b.max.z() : b.min.z())));
  return out;
}

std::vector<Other> others_of(const SceneGraph& g, int id) {
  std::vector<Other> out;
  for (const auto& [oid, n] : g.nodes)
    if (oid != id && n.sdf.size() > 0) out.push_back({oid, &n, n.state.inverse(), posed_box(n.sdf.bounds(), n.state)});
  return out;
}

// Largest downward shift in [0, limit] that keeps every vertex of the node
// outside the fields of the others; the contact model sees the fields, not
// the meshes.
double field_travel(const SceneGraph& g, int id, const std::vector<Other>& others, double limit) {
  const SceneNode& n = g.node(id);
  std::vector<Vec3> world;
  world.reserve(n.mesh.vertices.size());
  for (const auto& v : n.mesh.vertices) world.push_back(n.state.apply(v));
  auto clear = [&](double d) {
    for (const auto& w0 : world) {
      const Vec3 w = w0 - Vec3(0, 0, d);
      for (const auto& o : others)
        if (o.world_box.contains(w) && o.node->sdf.sample(o.object_from_world.apply(w)) < 0) return false;
    }
    return true;
  };
  if (clear(limit)) return limit;
  double lo = 0, hi = limit;
  for (int k = 0; k < 30; ++k) {
    const double mid = 0.5 * (lo + hi);
    (clear(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

double free_travel(const SceneGraph& g, int id, const Vec3& dir, double limit) {
  const SceneNode& n = g.node(id);
  const TriMesh world = transform_mesh(n.mesh, n.state);
  const MeshBvh self(world);
  double best = limit;
  for (const auto& [oid, o] : g.nodes) {
    if (oid == id || o.mesh.empty()) continue;
    const TriMesh ow = transform_mesh(o.mesh, o.state);
    const MeshBvh other(ow);
    const Aabb sweep = [&] {
      Aabb b = self.bounds();
      b.extend(Aabb{self.bounds().min + limit * dir, self.bounds().max + limit * dir});
      return b;
    }();
    if (!sweep.overlaps(other.bounds())) continue;
    for (const auto& v : world.vertices)
      if (const auto h = other.raycast(v, dir, 0.0, best)) best = std::min(best, h->t);
    for (const auto& v : ow.vertices) {
      if (!sweep.contains(v)) continue;
      if (const auto h = self.raycast(v, -dir, 0.0, best)) best = std::min(best, h->t);
    }
  }
  return best;
}

bool intersects_any(const SceneGraph& g, int id) {
  const SceneNode& n = g.node(id);
  const MeshBvh self(transform_mesh(n.mesh, n.state));
  for (const auto& [oid, o] : g.nodes) {
    if (oid == id || o.mesh.empty()) continue;
    const MeshBvh other(transform_mesh(o.mesh, o.state));
    if (self.bounds().overlaps(other.bounds()) && mesh_intersects(self, other)) return true;
  }
  return false;
}

AdjustLog adjust(SceneGraph& g, int id, const AdjustOptions& opt) {
  AdjustLog log;
  SceneNode& n = g.node(id);
  const auto others = others_of(g, id);

  // (1) Prune the node's field wherever another body is inside.
  {
    auto values = n.sdf.values_mut();
    const double trunc = n.sdf.truncation();
    for (std::size_t i = 0; i < n.sdf.size(); ++i) {
      if (values[i] >= trunc) continue;
      const Vec3 x = n.state.apply(n.sdf.point(i));
      double bound = -trunc;
      for (const auto& o : others) {
        if (!o.world_box.contains(x)) continue;
        const double go = o.node->sdf.sample(o.object_from_world.apply(x));
        if (go < 0) bound = std::max(bound, -go);
      }
      if (bound > values[i]) {
        n.sdf.set(i, bound);
        ++log.prune_voxels;
      }
    }
    if (log.prune_voxels > 0) n.mesh = marching_cubes(n.sdf);
  }
  if (n.mesh.empty())
    fail(ErrorCode::unresolved_penetration, "node " + std::to_string(id) + " vanished while pruning");

  // (2) Push vertices that are still inside another body out along its
  // gradient; the clearance doubles with every pass.
  const RigidTransform object_from_world = n.state.inverse();
  for (int iter = 0;; ++iter) {
    std::size_t moved = 0;
    int offender = -1;
    for (auto& v : n.mesh.vertices) {
      Vec3 w = n.state.apply(v);
      bool touched = false;
      for (const auto& o : others) {
        if (!o.world_box.contains(w)) continue;
        const Vec3 q = o.object_from_world.apply(w);
        const double phi = o.node->sdf.sample(q);
        if (phi >= 0) continue;
        offender = o.id;
        if (iter == opt.max_vertex_iterations) break;
        const Vec3 grad = o.node->sdf.gradient(q).value;
        if (grad.norm() < 1e-12) continue;
        w += (-phi + std::ldexp(opt.vertex_margin, iter)) * o.node->state.rotate(grad.normalized());
        touched = true;
        ++moved;
      }
      if (touched) v = object_from_world.apply(w);
    }
    if (offender < 0) break;
    if (iter == opt.max_vertex_iterations || moved == 0)
      fail(ErrorCode::unresolved_penetration,
           "unresolved penetration between nodes " + std::to_string(id) + " and " + std::to_string(offender));
    log.vertex_moves += moved;
  }
  if (log.vertex_moves > 0) n.mesh.compute_normals();

  // (3) Drop onto the support parent.
  if (g.parent(id)) {
    const double height = n.mesh.bounds().extent().z() + 0.1;
    double dz = 0;
    if (intersects_any(g, id)) {
      double lo = 0, hi = height;
      const Vec3 start = n.state.translation;
      for (int k = 0; k < 30; ++k) {
        const double mid = 0.5 * (lo + hi);
        n.state.translation = start + Vec3(0, 0, mid);
        (intersects_any(g, id) ? lo : hi) = mid;
      }
      n.state.translation = start + Vec3(0, 0, hi);
      dz += hi;
    }
    double travel = free_travel(g, id, -Vec3::UnitZ(), 10.0);
    if (travel < 10.0) travel = std::min(travel, field_travel(g, id, others, travel));
    if (travel < 10.0 && travel > opt.contact_gap) {
      n.state.translation.z() -= travel - opt.contact_gap;
      dz -= travel - opt.contact_gap;
    }
    log.drop_dz = dz;
  }
  n.physics = default_physics(n.mesh, opt.density);
  return log;
}

PhysicsEnergy physics_energy(const SceneGraph& g, const RunConfig& cfg, const SimOptions& sim) {
  PhysicsEnergy e;
  SimOptions so = sim;
  so.dt = cfg.sim_dt;
  e.e_stable = e_stable(g, cfg.sim_duration, so);
  e.e_touch = e_touch(g);
  e.e_pene = e_pene_sdf(g) + e_pene_mesh(g);
  e.total = e.e_stable + e.e_touch + cfg.lambda_pene * e.e_pene;
  return e;
}

namespace {

SceneGraph root_only(const SceneGraph& topology) {
  SceneGraph g;
  g.root = topology.root;
  g.nodes[topology.root] = topology.node(topology.root);
  return g;
}

void attach(SceneGraph& g, const SceneGraph& topology, int id, SceneNode node) {
  g.nodes[id] = std::move(node);
  for (const auto& e : topology.edges)
    if ((e.a == id && g.has(e.b)) || (e.b == id && g.has(e.a))) g.edges.push_back(e);
}

}  // namespace

SearchResult tree_search(const SceneGraph& topology, const std::map<int, std::vector<Candidate>>& candidates,
                         const RunConfig& cfg, const SimOptions& sim) {
  require(validate(topology).empty(), "tree_search: topology is not a valid scene graph");
  SearchResult out;
  out.graph = root_only(topology);
  const AdjustOptions aopt{.density = cfg.density};
  for (int id : topology.bfs_order()) {
    if (id == topology.root) continue;
    const auto it = candidates.find(id);
    if (it == candidates.end() || it->second.empty())
      fail(ErrorCode::no_candidates, "node " + std::to_string(id) + " has no candidates");
    const auto& cs = it->second;
    std::vector<SceneGraph> trial(cs.size());
    std::vector<SearchRecord> rec(cs.size());
    std::vector<ErrorCode> code(cs.size(), ErrorCode::unresolved_penetration);
    parallel_for(cs.size(), [&](std::size_t k) {
      trial[k] = out.graph;
      attach(trial[k], topology, id, install_candidate(cs[k], id, cfg.density));
      rec[k].node = id;
      rec[k].candidate = static_cast<int>(k);
      try {
        rec[k].adjust = adjust(trial[k], id, aopt);
        rec[k].energy = physics_energy(trial[k], cfg, sim);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::unresolved_penetration && e.code() != ErrorCode::simulation_diverged) throw;
        rec[k].error = e.what();
        code[k] = e.code();
      }
    });
    std::size_t best = cs.size();
    for (std::size_t k = 0; k < cs.size(); ++k)
      if (rec[k].error.empty() && (best == cs.size() || rec[k].energy.total < rec[best].energy.total)) best = k;
    if (best == cs.size()) fail(code.front(), rec.front().error);
    rec[best].chosen = true;
    out.graph = std::move(trial[best]);
    for (auto& r : rec) out.log.push_back(std::move(r));
  }
  return out;
}

PhysicsEnergy evaluate_assignment(const SceneGraph& topology, const std::map<int, std::vector<Candidate>>& candidates,
                                  const std::map<int, int>& choice, const RunConfig& cfg, const SimOptions& sim,
                                  SceneGraph* out) {
  SceneGraph g = root_only(topology);
  const AdjustOptions aopt{.density = cfg.density};
  for (int id : topology.bfs_order()) {
    if (id == topology.root) continue;
    const auto& cs = candidates.at(id);
    attach(g, topology, id, install_candidate(cs.at(choice.at(id)), id, cfg.density));
    adjust(g, id, aopt);
  }
  const auto e = physics_energy(g, cfg, sim);
  if (out) *out = std::move(g);
  return e;
}

std::string search_log_jsonl(const std::vector<SearchRecord>& log) {
  std::string s;
  for (const auto& r : log) {
    nlohmann::ordered_json j;
    j["node"] = r.node;
    j["candidate"] = r.candidate;
    if (r.error.empty()) {
      j["e_stable"] = r.energy.e_stable;
      j["e_touch"] = r.energy.e_touch;
      j["e_pene"] = r.energy.e_pene;
      j["e_physics"] = r.energy.total;
    } else {
      j["error"] = r.error;
    }
    j["chosen"] = r.chosen;
    j["adjust"] = {{"prune_voxels", r.adjust.prune_voxels},
                   {"vertex_moves", r.adjust.vertex_moves},
                   {"drop_dz", r.adjust.drop_dz}};
    s += j.dump() + "\n";
  }
  return s;
}

}  // namespace sceneforge
