#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sceneforge/geom/rigid_transform.hpp"
#include "sceneforge/geom/sdf_grid.hpp"
#include "sceneforge/geom/trimesh.hpp"

namespace sceneforge {

enum class RelationKind { support, beside, collide };

const char* to_string(RelationKind kind);
std::optional<RelationKind> relation_from_string(const std::string& s);

struct PhysicsParams {
  double mass = 1.0;
  double friction = 0.6;
  double damping = 0.05;
  double restitution = 0.0;

  bool valid() const;
  bool operator==(const PhysicsParams&) const = default;
};

struct SceneNode {
  int id = 0;
  SdfGrid sdf;    // object frame
  TriMesh mesh;   // object frame
  RigidTransform state;
  PhysicsParams physics;
  std::string label;
  std::array<double, 3> color{0.7, 0.7, 0.7};

  bool operator==(const SceneNode&) const = default;
};

/// For support edges `a` rests on `b`. Beside and collide edges are
/// unordered.
struct Edge {
  int a = 0;
  int b = 0;
  RelationKind kind = RelationKind::support;

  bool operator==(const Edge&) const = default;
};

struct SceneGraph {
  std::map<int, SceneNode> nodes;
  std::vector<Edge> edges;
  int root = 0;

  bool has(int id) const { return nodes.count(id) != 0; }
  const SceneNode& node(int id) const;
  SceneNode& node(int id);

  /// First support parent of id, if any.
  std::optional<int> parent(int id) const;
  /// Support children in ascending id order.
  std::vector<int> children(int id) const;
  /// Replaces any existing support edge of child.
  void set_parent(int child, int parent);
  /// Removes id and every edge touching it.
  void erase(int id);

  /// Breadth-first order from root over support edges; children visited in
  /// ascending id. Nodes unreachable from root are not listed.
  std::vector<int> bfs_order() const;
  /// Non-root ids in ascending order.
  std::vector<int> object_ids() const;

  bool operator==(const SceneGraph&) const = default;
};

struct Violation {
  enum class Kind {
    dangling_edge,
    missing_root,
    root_has_parent,
    no_parent,
    multiple_parents,
    cycle,
    non_sibling_beside,
    collide_edge,
    self_edge,
  };
  Kind kind;
  std::vector<int> ids;
  std::string message;
};

const char* to_string(Violation::Kind kind);

/// Every invariant violation; empty iff the graph is well formed.
std::vector<Violation> validate(const SceneGraph& g);

/// Path from id up to root, root last.
std::vector<int> support_chain(const SceneGraph& g, int id);

/// Writes <dir>/scene.json plus meshes/<id>.obj and sdf/<id>.sdfgrid.
void save_scene(const SceneGraph& g, const std::filesystem::path& dir);
SceneGraph load_scene(const std::filesystem::path& dir);
/// Canonical JSON text of the graph structure (what save_scene writes).
std::string scene_json(const SceneGraph& g);

}  // namespace sceneforge
