#include "sceneforge/synth/scene_spec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "sceneforge/geom/mesh_query.hpp"
#include "sceneforge/search/search.hpp"
#include "sceneforge/synth/shapes.hpp"
#include "sceneforge/util/error.hpp"

namespace sceneforge {

using nlohmann::json;

namespace {

RigidTransform at(double x, double y, double z, double yaw_deg = 0.0) {
  return {Quat(Eigen::AngleAxisd(yaw_deg * M_PI / 180.0, Vec3::UnitZ())), Vec3(x, y, z)};
}

AnalyticSdf table_shape(const Vec3& slab_half, double height, double leg_half, double inset) {
  std::vector<AnalyticSdf> parts;
  parts.push_back(AnalyticSdf::box(slab_half, Vec3(0, 0, height - slab_half.z())));
  const double leg_hz = 0.5 * (height - 2 * slab_half.z());
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      parts.push_back(AnalyticSdf::box(Vec3(leg_half, leg_half, leg_hz),
                                       Vec3(sx * (slab_half.x() - inset), sy * (slab_half.y() - inset), leg_hz)));
  return AnalyticSdf::make_union(std::move(parts));
}

AnalyticSdf shelf_shape() {
  const double w = 0.40, d = 0.15, h = 0.80, t = 0.015;
  std::vector<AnalyticSdf> parts;
  for (int s : {-1, 1}) parts.push_back(AnalyticSdf::box(Vec3(t, d, 0.5 * h), Vec3(s * (w - t), 0, 0.5 * h)));
  for (double z : {t, 0.5 * h, h - t}) parts.push_back(AnalyticSdf::box(Vec3(w - 2 * t, d, t), Vec3(0, 0, z)));
  return AnalyticSdf::make_union(std::move(parts));
}

SpecObject obj(int id, std::string label, AnalyticSdf shape, RigidTransform pose) {
  return {id, std::move(label), std::move(shape), pose, std::nullopt};
}

json transform_to_json(const RigidTransform& t) {
  const auto& q = t.rotation;
  return {{"rotation", {q.w(), q.x(), q.y(), q.z()}},
          {"translation", {t.translation.x(), t.translation.y(), t.translation.z()}}};
}

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  fail(ErrorCode::parse, where + ": " + what);
}

const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& where, std::size_t n) {
  if (!j.is_array() || (n > 0 && j.size() != n)) bad(where, "expected an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

RigidTransform transform_from_json(const json& j, const std::string& where) {
  const auto r = numbers(member(j, "rotation", where), where + ".rotation", 4);
  const auto t = numbers(member(j, "translation", where), where + ".translation", 3);
  RigidTransform out{Quat(r[0], r[1], r[2], r[3]), Vec3(t[0], t[1], t[2])};
  if (std::abs(out.rotation.norm() - 1.0) > 1e-6) bad(where + ".rotation", "quaternion is not unit length");
  out.rotation.normalize();
  return out;
}

json shape_to_json(const AnalyticSdf& a) {
  json j{{"kind", to_string(a.kind)}, {"params", a.params}, {"local", transform_to_json(a.local)}};
  if (!a.children.empty()) {
    j["children"] = json::array();
    for (const auto& c : a.children) j["children"].push_back(shape_to_json(c));
  }
  return j;
}

AnalyticSdf shape_from_json(const json& j, const std::string& where) {
  AnalyticSdf a;
  const auto& kind = member(j, "kind", where);
  if (!kind.is_string()) bad(where + ".kind", "expected a string");
  try {
    a.kind = analytic_kind_from_string(kind.get<std::string>());
  } catch (const Error& e) {
    bad(where + ".kind", e.what());
  }
  if (j.contains("params")) a.params = numbers(j.at("params"), where + ".params", 0);
  if (j.contains("local")) a.local = transform_from_json(j.at("local"), where + ".local");
  if (j.contains("children")) {
    const auto& c = j.at("children");
    if (!c.is_array()) bad(where + ".children", "expected an array");
    for (std::size_t i = 0; i < c.size(); ++i)
      a.children.push_back(shape_from_json(c[i], where + ".children[" + std::to_string(i) + "]"));
  }
  try {
    a.validate();
  } catch (const Error& e) {
    bad(where, e.what());
  }
  return a;
}

double object_spacing(const AnalyticSdf& shape) {
  const Vec3 e = shape.bounds().extent();
  return std::clamp(e.maxCoeff() / 60.0, 0.003, 0.02);
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"table-3items", "stack-3", "shelf-2", "edge-balance", "cup-on-book-on-table", "dense-cluster"};
}

SceneSpec preset(const std::string& name) {
  SceneSpec s;
  s.name = name;
  if (name == "table-3items") {
    s.objects.push_back(obj(1, "table", table_shape(Vec3(0.45, 0.30, 0.02), 0.72, 0.03, 0.05), at(0, 0, 0)));
    s.objects.push_back(obj(2, "book", AnalyticSdf::box(Vec3(0.10, 0.07, 0.02)), at(-0.20, 0.06, 0.8, 10)));
    s.objects.push_back(obj(3, "cup", AnalyticSdf::cylinder(0.04, 0.06), at(0.04, -0.10, 0.8)));
    s.objects.push_back(obj(4, "box", AnalyticSdf::box(Vec3(0.06, 0.05, 0.05)), at(0.24, 0.10, 0.8, 25)));
  } else if (name == "stack-3") {
    s.objects.push_back(obj(1, "box", AnalyticSdf::box(Vec3(0.15, 0.15, 0.08)), at(0, 0, 0)));
    s.objects.push_back(obj(2, "box", AnalyticSdf::box(Vec3(0.11, 0.10, 0.06)), at(0.02, -0.01, 0.25, 15)));
    s.objects.push_back(obj(3, "box", AnalyticSdf::box(Vec3(0.07, 0.07, 0.05)), at(-0.01, 0.02, 0.45, 40)));
  } else if (name == "shelf-2") {
    s.objects.push_back(obj(1, "shelf", shelf_shape(), at(0, 0, 0)));
    s.objects.push_back(obj(2, "box", AnalyticSdf::box(Vec3(0.08, 0.07, 0.06)), at(-0.15, 0, 0.10)));
    s.objects.push_back(obj(3, "cup", AnalyticSdf::cylinder(0.045, 0.07), at(0.15, 0, 0.49)));
  } else if (name == "edge-balance") {
    s.objects.push_back(obj(1, "block", AnalyticSdf::box(Vec3(0.12, 0.12, 0.15)), at(0, 0, 0)));
    s.objects.push_back(obj(2, "board", AnalyticSdf::box(Vec3(0.20, 0.06, 0.02)), at(0.10, 0, 0.35)));
  } else if (name == "cup-on-book-on-table") {
    s.objects.push_back(obj(1, "table", table_shape(Vec3(0.30, 0.25, 0.02), 0.50, 0.025, 0.04), at(0, 0, 0)));
    s.objects.push_back(obj(2, "book", AnalyticSdf::box(Vec3(0.12, 0.09, 0.025)), at(0.02, 0, 0.6, -8)));
    s.objects.push_back(obj(3, "cup", AnalyticSdf::cylinder(0.04, 0.055), at(0.03, 0.01, 0.7)));
  } else if (name == "dense-cluster") {
    s.objects.push_back(obj(1, "box", AnalyticSdf::box(Vec3(0.08, 0.08, 0.08)), at(-0.10, -0.09, 0)));
    s.objects.push_back(obj(2, "box", AnalyticSdf::box(Vec3(0.07, 0.06, 0.05)), at(0.075, -0.085, 0, 10)));
    s.objects.push_back(obj(3, "cup", AnalyticSdf::cylinder(0.05, 0.07), at(-0.09, 0.09, 0)));
    s.objects.push_back(obj(4, "box", AnalyticSdf::box(Vec3(0.06, 0.07, 0.04)), at(0.08, 0.085, 0, -20)));
    s.objects.push_back(obj(5, "box", AnalyticSdf::box(Vec3(0.05, 0.05, 0.03)), at(-0.09, -0.08, 0.3, 30)));
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    fail(ErrorCode::precondition, "unknown preset '" + name + "'; known presets: " + known);
  }
  return s;
}

std::string scene_spec_json(const SceneSpec& s) {
  json objects = json::array();
  for (const auto& o : s.objects) {
    json j{{"id", o.id}, {"label", o.label}, {"shape", shape_to_json(o.shape)}, {"pose", transform_to_json(o.pose)}};
    if (o.physics)
      j["physics"] = {{"mass", o.physics->mass},
                      {"friction", o.physics->friction},
                      {"damping", o.physics->damping},
                      {"restitution", o.physics->restitution}};
    objects.push_back(j);
  }
  json j{{"name", s.name},
         {"seed", s.seed},
         {"floor_half_size", s.floor_half_size},
         {"floor_thickness", s.floor_thickness},
         {"objects", objects}};
  return j.dump(2) + "\n";
}

SceneSpec scene_spec_from_json(const std::string& text, const std::string& name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(name, e.what());
  }
  SceneSpec s;
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) bad(name + ".seed", "expected an unsigned integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("floor_half_size")) s.floor_half_size = number(j.at("floor_half_size"), name + ".floor_half_size");
  if (j.contains("floor_thickness")) s.floor_thickness = number(j.at("floor_thickness"), name + ".floor_thickness");
  if (!(s.floor_half_size > 0)) bad(name + ".floor_half_size", "must be positive");
  if (!(s.floor_thickness > 0)) bad(name + ".floor_thickness", "must be positive");
  const auto& objects = member(j, "objects", name);
  if (!objects.is_array() || objects.empty()) bad(name + ".objects", "expected a nonempty array");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string w = name + ".objects[" + std::to_string(i) + "]";
    const auto& oj = objects[i];
    SpecObject o;
    const auto& id = member(oj, "id", w);
    if (!id.is_number_integer() || id.get<int>() <= 0) bad(w + ".id", "expected a positive integer");
    o.id = id.get<int>();
    for (const auto& prev : s.objects)
      if (prev.id == o.id) bad(w + ".id", "duplicate id " + std::to_string(o.id));
    if (oj.contains("label")) o.label = oj.at("label").get<std::string>();
    o.shape = shape_from_json(member(oj, "shape", w), w + ".shape");
    if (o.shape.bounds().empty()) bad(w + ".shape", "unbounded shape");
    if (oj.contains("pose")) o.pose = transform_from_json(oj.at("pose"), w + ".pose");
    if (oj.contains("physics")) {
      const auto& p = oj.at("physics");
      PhysicsParams pp;
      if (p.contains("mass")) pp.mass = number(p.at("mass"), w + ".physics.mass");
      if (p.contains("friction")) pp.friction = number(p.at("friction"), w + ".physics.friction");
      if (p.contains("damping")) pp.damping = number(p.at("damping"), w + ".physics.damping");
      if (p.contains("restitution")) pp.restitution = number(p.at("restitution"), w + ".physics.restitution");
      if (!pp.valid()) bad(w + ".physics", "parameters out of range");
      o.physics = pp;
    }
    s.objects.push_back(std::move(o));
  }
  return s;
}

GeneratedScene generate_scene(const SceneSpec& spec, double density, double gap) {
  require(!spec.objects.empty(), "generate_scene: no objects");
  GeneratedScene out;
  out.spec = spec;
  SceneGraph g;
  g.root = 0;
  g.nodes[0] = floor_node(0, spec.floor_half_size, spec.floor_thickness);
  for (auto& o : out.spec.objects) {
    require(o.id > 0 && !g.has(o.id), "generate_scene: object ids must be positive and unique");
    SceneNode n = node_from_shape(o.id, o.shape, o.pose, object_spacing(o.shape), density, o.label);
    if (o.physics) n.physics = *o.physics;
    const double height = n.mesh.bounds().extent().z();
    g.nodes[o.id] = std::move(n);
    SceneNode& placed = g.node(o.id);
    // Never start below the floor.
    double bottom = 1e9;
    for (const auto& v : placed.mesh.vertices) bottom = std::min(bottom, placed.state.apply(v).z());
    if (bottom < gap) placed.state.translation.z() += gap - bottom;
    if (intersects_any(g, o.id)) {
      const Vec3 start = placed.state.translation;
      double lo = 0, hi = height + 0.1;
      for (int k = 0; k < 30; ++k) {
        const double mid = 0.5 * (lo + hi);
        placed.state.translation = start + Vec3(0, 0, mid);
        (intersects_any(g, o.id) ? lo : hi) = mid;
      }
      placed.state.translation = start + Vec3(0, 0, hi);
      out.warnings.push_back("object " + std::to_string(o.id) + " overlapped earlier objects; lifted clear");
    }
    const double travel = free_travel(g, o.id, -Vec3::UnitZ(), 10.0);
    require(travel < 10.0, "generate_scene: nothing below object " + std::to_string(o.id));
    if (travel > gap) placed.state.translation.z() -= travel - gap;
    o.pose = placed.state;
  }
  std::vector<SupportInput> inputs;
  for (const auto& o : out.spec.objects) inputs.push_back({o.id, transform_mesh(g.node(o.id).mesh, g.node(o.id).state)});
  const auto& f = g.node(0);
  auto inferred = infer_support_tree(inputs, {0, transform_mesh(f.mesh, f.state)});
  for (const auto& e : inferred.graph.edges) g.edges.push_back(e);
  for (auto& w : inferred.warnings) out.warnings.push_back(std::move(w));
  for (const auto& w : out.warnings) spdlog::warn("{}", w);
  out.graph = std::move(g);
  return out;
}

std::vector<GtObject> gt_objects(const SceneSpec& spec) {
  std::vector<GtObject> out;
  out.push_back({0,
                 AnalyticSdf::box(Vec3(spec.floor_half_size, spec.floor_half_size, 0.5 * spec.floor_thickness),
                                  Vec3(0, 0, -0.5 * spec.floor_thickness)),
                 RigidTransform::identity()});
  for (const auto& o : spec.objects) out.push_back({o.id, o.shape, o.pose});
  return out;
}

std::vector<Camera> scene_trajectory(const SceneSpec& spec, int views) {
  require(views > 0, "trajectory: views must be positive");
  Aabb box;
  for (const auto& o : spec.objects) {
    const Aabb b = o.shape.bounds();
    for (int c = 0; c < 8; ++c)
      box.extend(o.pose.apply(Vec3(c & 1 ? b.max.x() : b.min.x(), c & 2 ? b.max.y() : b.min.y(),
                                   c & 4 ? b.max.z() : b.min.z())));
  }
  const double r = 0.5 * box.extent().norm();
  return orbit_trajectory(box.center(), std::max(0.8, 2.4 * r), views);
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot write " + p.string());
  f << text;
  if (!f) fail(ErrorCode::io, "write failed: " + p.string());
}

}  // namespace

void save_scene_bundle(const GeneratedScene& s, const std::vector<Camera>& trajectory,
                       const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "shapes", ec);
  if (ec) fail(ErrorCode::io, "cannot create " + (dir / "shapes").string());
  write_text(dir / "spec.json", scene_spec_json(s.spec));
  save_scene(s.graph, dir / "gt");
  for (const auto& o : s.spec.objects)
    write_text(dir / "shapes" / (std::to_string(o.id) + ".json"),
               json{{"id", o.id}, {"label", o.label}, {"shape", shape_to_json(o.shape)}, {"pose", transform_to_json(o.pose)}}
                       .dump(2) +
                   "\n");
  json cams = json::array();
  for (const auto& c : trajectory) cams.push_back(json::parse(camera_json(c)));
  write_text(dir / "trajectory.json", cams.dump(2) + "\n");
}

SceneSpec load_bundle_spec(const std::filesystem::path& dir) {
  const auto p = dir / "spec.json";
  std::ifstream f(p, std::ios::binary);
  if (!f) fail(ErrorCode::missing_asset, "missing scene bundle: " + p.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return scene_spec_from_json(ss.str(), p.string());
}

}  // namespace sceneforge
