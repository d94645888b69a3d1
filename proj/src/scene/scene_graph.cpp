#include "sceneforge/scene/scene_graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "sceneforge/geom/io.hpp"
#include "sceneforge/util/error.hpp"

namespace sceneforge {

using nlohmann::json;

const char* to_string(RelationKind kind) {
  switch (kind) {
    case RelationKind::support: return "support";
    case RelationKind::beside: return "beside";
    case RelationKind::collide: return "collide";
  }
  return "?";
}

std::optional<RelationKind> relation_from_string(const std::string& s) {
  if (s == "support") return RelationKind::support;
  if (s == "beside") return RelationKind::beside;
  if (s == "collide") return RelationKind::collide;
  return std::nullopt;
}

bool PhysicsParams::valid() const {
  return std::isfinite(mass) && mass > 0 && std::isfinite(friction) && friction >= 0 &&
         std::isfinite(damping) && damping >= 0 && restitution >= 0 && restitution <= 1;
}

const SceneNode& SceneGraph::node(int id) const {
  auto it = nodes.find(id);
  if (it == nodes.end()) fail(ErrorCode::precondition, "unknown node id " + std::to_string(id));
  return it->second;
}

SceneNode& SceneGraph::node(int id) {
  auto it = nodes.find(id);
  if (it == nodes.end()) fail(ErrorCode::precondition, "unknown node id " + std::to_string(id));
  return it->second;
}

std::optional<int> SceneGraph::parent(int id) const {
  for (const auto& e : edges)
    if (e.kind == RelationKind::support && e.a == id) return e.b;
  return std::nullopt;
}

std::vector<int> SceneGraph::children(int id) const {
  std::vector<int> out;
  for (const auto& e : edges)
    if (e.kind == RelationKind::support && e.b == id) out.push_back(e.a);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void SceneGraph::set_parent(int child, int parent_id) {
  std::erase_if(edges, [&](const Edge& e) {
    return e.kind == RelationKind::support && e.a == child;
  });
  edges.push_back({child, parent_id, RelationKind::support});
}

void SceneGraph::erase(int id) {
  nodes.erase(id);
  std::erase_if(edges, [&](const Edge& e) { return e.a == id || e.b == id; });
}

std::vector<int> SceneGraph::bfs_order() const {
  std::vector<int> order;
  if (!has(root)) return order;
  std::set<int> seen{root};
  std::deque<int> queue{root};
  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    order.push_back(id);
    for (int c : children(id))
      if (seen.insert(c).second) queue.push_back(c);
  }
  return order;
}

std::vector<int> SceneGraph::object_ids() const {
  std::vector<int> ids;
  for (const auto& [id, n] : nodes)
    if (id != root) ids.push_back(id);
  return ids;
}

const char* to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::dangling_edge: return "dangling-edge";
    case Violation::Kind::missing_root: return "missing-root";
    case Violation::Kind::root_has_parent: return "root-has-parent";
    case Violation::Kind::no_parent: return "no-parent";
    case Violation::Kind::multiple_parents: return "multiple-parents";
    case Violation::Kind::cycle: return "cycle";
    case Violation::Kind::non_sibling_beside: return "non-sibling-beside";
    case Violation::Kind::collide_edge: return "collide-edge";
    case Violation::Kind::self_edge: return "self-edge";
  }
  return "?";
}

std::vector<Violation> validate(const SceneGraph& g) {
  using K = Violation::Kind;
  std::vector<Violation> out;
  auto add = [&](K kind, std::vector<int> ids, std::string msg) {
    out.push_back({kind, std::move(ids), std::move(msg)});
  };
  if (!g.has(g.root))
    add(K::missing_root, {g.root}, "root " + std::to_string(g.root) + " is not a node");

  std::map<int, std::vector<int>> parents;
  for (const auto& e : g.edges) {
    const std::string pair = std::to_string(e.a) + "-" + std::to_string(e.b);
    if (!g.has(e.a) || !g.has(e.b)) {
      add(K::dangling_edge, {e.a, e.b}, "edge " + pair + " references a missing node");
      continue;
    }
    if (e.a == e.b) {
      add(K::self_edge, {e.a}, "edge " + pair + " connects a node to itself");
      continue;
    }
    if (e.kind == RelationKind::support) parents[e.a].push_back(e.b);
    if (e.kind == RelationKind::collide)
      add(K::collide_edge, {e.a, e.b}, "collide edge " + pair + " in a static graph");
  }

  for (const auto& [id, n] : g.nodes) {
    const auto it = parents.find(id);
    const std::size_t count = it == parents.end() ? 0 : it->second.size();
    if (id == g.root) {
      if (count > 0) add(K::root_has_parent, {id}, "root has a support parent");
    } else if (count == 0) {
      add(K::no_parent, {id}, "node " + std::to_string(id) + " has no support parent");
    } else if (count > 1) {
      std::vector<int> ids{id};
      ids.insert(ids.end(), it->second.begin(), it->second.end());
      add(K::multiple_parents, ids, "node " + std::to_string(id) + " has several support parents");
    }
  }

  // Walk first parents; a walk that revisits a node without reaching the
  // root has found a cycle. Each cycle is reported once.
  std::set<std::vector<int>> cycles;
  for (const auto& [start, n] : g.nodes) {
    std::vector<int> path;
    std::set<int> on_path;
    int cur = start;
    while (true) {
      if (on_path.count(cur)) {
        std::vector<int> cyc(std::find(path.begin(), path.end(), cur), path.end());
        std::sort(cyc.begin(), cyc.end());
        cycles.insert(cyc);
        break;
      }
      path.push_back(cur);
      on_path.insert(cur);
      const auto it = parents.find(cur);
      if (it == parents.end() || it->second.empty()) break;
      cur = it->second.front();
    }
  }
  for (const auto& cyc : cycles) {
    std::string msg = "support cycle through";
    for (int id : cyc) msg += " " + std::to_string(id);
    add(K::cycle, cyc, msg);
  }

  for (const auto& e : g.edges) {
    if (e.kind != RelationKind::beside || !g.has(e.a) || !g.has(e.b)) continue;
    if (g.parent(e.a) != g.parent(e.b))
      add(K::non_sibling_beside, {e.a, e.b},
          "beside edge " + std::to_string(e.a) + "-" + std::to_string(e.b) +
              " joins nodes with different parents");
  }
  return out;
}

std::vector<int> support_chain(const SceneGraph& g, int id) {
  if (!g.has(id)) fail(ErrorCode::precondition, "support_chain: unknown id " + std::to_string(id));
  std::vector<int> chain{id};
  while (chain.back() != g.root) {
    const auto p = g.parent(chain.back());
    if (!p) fail(ErrorCode::invalid_graph, "node " + std::to_string(chain.back()) + " has no parent");
    if (chain.size() > g.nodes.size())
      fail(ErrorCode::invalid_graph, "support cycle above node " + std::to_string(id));
    chain.push_back(*p);
  }
  return chain;
}

namespace {

std::string mesh_ref(int id) { return "meshes/" + std::to_string(id) + ".obj"; }
std::string sdf_ref(int id) { return "sdf/" + std::to_string(id) + ".sdfgrid"; }

json to_json(const SceneGraph& g) {
  json nodes = json::array();
  for (const auto& [id, n] : g.nodes) {
    const auto& q = n.state.rotation;
    const auto& t = n.state.translation;
    nodes.push_back({
        {"id", id},
        {"label", n.label},
        {"mesh", n.mesh.empty() ? json(nullptr) : json(mesh_ref(id))},
        {"sdf", n.sdf.size() == 0 ? json(nullptr) : json(sdf_ref(id))},
        {"state",
         {{"rotation", {q.w(), q.x(), q.y(), q.z()}}, {"translation", {t.x(), t.y(), t.z()}}}},
        {"physics",
         {{"mass", n.physics.mass},
          {"friction", n.physics.friction},
          {"damping", n.physics.damping},
          {"restitution", n.physics.restitution}}},
        {"color", n.color},
    });
  }
  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back({{"a", e.a}, {"b", e.b}, {"kind", to_string(e.kind)}});
  return {{"root", g.root}, {"nodes", nodes}, {"edges", edges}};
}

template <class T>
T field(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key))
    fail(ErrorCode::parse, ctx + "." + key + ": missing field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, ctx + "." + key + ": " + e.what());
  }
}

}  // namespace

std::string scene_json(const SceneGraph& g) { return to_json(g).dump(2) + "\n"; }

void save_scene(const SceneGraph& g, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "meshes");
  fs::create_directories(dir / "sdf");
  for (const auto& [id, n] : g.nodes) {
    if (!n.mesh.empty()) write_obj(n.mesh, dir / mesh_ref(id));
    if (n.sdf.size() != 0) write_sdfgrid(n.sdf, dir / sdf_ref(id));
  }
  std::ofstream f(dir / "scene.json", std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot write " + (dir / "scene.json").string());
  f << scene_json(g);
}

SceneGraph load_scene(const std::filesystem::path& dir) {
  const auto path = dir / "scene.json";
  std::ifstream f(path);
  if (!f) fail(ErrorCode::missing_asset, "missing scene file " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, path.string() + ": " + e.what());
  }
  SceneGraph g;
  g.root = field<int>(j, "root", "scene");
  const auto nodes = field<json>(j, "nodes", "scene");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const json& jn = nodes[i];
    const std::string ctx = "nodes[" + std::to_string(i) + "]";
    SceneNode n;
    n.id = field<int>(jn, "id", ctx);
    n.label = field<std::string>(jn, "label", ctx);
    const auto state = field<json>(jn, "state", ctx);
    const auto q = field<std::array<double, 4>>(state, "rotation", ctx + ".state");
    const auto t = field<std::array<double, 3>>(state, "translation", ctx + ".state");
    n.state = {Quat(q[0], q[1], q[2], q[3]), Vec3(t[0], t[1], t[2])};
    if (!n.state.valid()) fail(ErrorCode::parse, ctx + ".state.rotation: not a unit quaternion");
    const auto ph = field<json>(jn, "physics", ctx);
    n.physics.mass = field<double>(ph, "mass", ctx + ".physics");
    n.physics.friction = field<double>(ph, "friction", ctx + ".physics");
    n.physics.damping = field<double>(ph, "damping", ctx + ".physics");
    n.physics.restitution = field<double>(ph, "restitution", ctx + ".physics");
    if (!n.physics.valid()) fail(ErrorCode::parse, ctx + ".physics: out of range");
    if (jn.contains("color")) n.color = field<std::array<double, 3>>(jn, "color", ctx);
    if (jn.contains("mesh") && !jn["mesh"].is_null())
      n.mesh = read_obj(dir / field<std::string>(jn, "mesh", ctx));
    if (jn.contains("sdf") && !jn["sdf"].is_null())
      n.sdf = read_sdfgrid(dir / field<std::string>(jn, "sdf", ctx));
    if (!g.nodes.emplace(n.id, std::move(n)).second)
      fail(ErrorCode::parse, ctx + ".id: duplicate id");
  }
  const auto edges = field<json>(j, "edges", "scene");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string ctx = "edges[" + std::to_string(i) + "]";
    Edge e;
    e.a = field<int>(edges[i], "a", ctx);
    e.b = field<int>(edges[i], "b", ctx);
    const auto kind = field<std::string>(edges[i], "kind", ctx);
    const auto rk = relation_from_string(kind);
    if (!rk) fail(ErrorCode::parse, ctx + ".kind: unknown relation '" + kind + "'");
    e.kind = *rk;
    g.edges.push_back(e);
  }
  if (const auto v = validate(g); !v.empty())
    fail(ErrorCode::invalid_graph, path.string() + ": " + v.front().message);
  return g;
}

}  // namespace sceneforge
