#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sceneforge/complete/complete.hpp"
#include "sceneforge/physics/simulator.hpp"
#include "sceneforge/scene/config.hpp"
#include "sceneforge/scene/scene_graph.hpp"

namespace sceneforge {

/// One world-frame mesh offered to support inference.
struct SupportInput {
  int id = 0;
  TriMesh mesh;
};

struct SupportHypothesis {
  int child = 0;
  int parent = 0;
  double area = 0.0;                 // m^2
  Vec3 normal = Vec3::UnitZ();       // mean parent surface normal, unit
  double height = 0.0;               // mean parent surface height
  double gap = 0.0;                  // mean child-minus-parent height
};

struct SupportOptions {
  double min_up_cos = 0.766;         // cos 40 degrees
  double max_gap = 0.03;
  double max_embed = 0.02;
  double beside_distance = 0.01;
  std::size_t samples = 4000;
};

struct SupportInference {
  /// Nodes carry the input meshes at identity state.
  SceneGraph graph;
  std::vector<SupportHypothesis> chosen;
  std::vector<std::string> warnings;
};

/// Each object rests on the node below it with the largest upward-facing
/// contact area (ties: smaller gap, then smaller id); objects with no such
/// node rest on the background. Mutual support is broken by attaching the
/// node with the lower centroid to the background.
SupportInference infer_support_tree(const std::vector<SupportInput>& instances, const SupportInput& background,
                                    const SupportOptions& opt = {});

struct AdjustOptions {
  /// Target gap after drop-to-contact.
  double contact_gap = 5e-4;
  double max_contact_gap = 1e-3;
  double vertex_margin = 1e-5;
  int max_vertex_iterations = 10;
  double density = 300.0;
};

struct AdjustLog {
  std::size_t prune_voxels = 0;
  std::size_t vertex_moves = 0;
  double drop_dz = 0.0;
};

/// Makes node `id` of g physically admissible against every other node of
/// g: SDF pruning, vertex de-penetration, drop-to-contact on its support
/// parent. Throws unresolved-penetration naming the pair when vertices stay
/// inside another body after max_vertex_iterations.
AdjustLog adjust(SceneGraph& g, int id, const AdjustOptions& opt = {});

/// Distance node `id` can move along the unit direction `dir` before its
/// mesh meets another node's mesh (vertex rays both ways), capped at limit.
double free_travel(const SceneGraph& g, int id, const Vec3& dir, double limit);

/// True when node `id`'s mesh intersects another node's mesh.
bool intersects_any(const SceneGraph& g, int id);

/// Node `id` built from a candidate.
SceneNode install_candidate(const Candidate& c, int id, double density);

struct PhysicsEnergy {
  double e_stable = 0.0;
  double e_touch = 0.0;
  double e_pene = 0.0;  // pene_sdf + pene_mesh
  double total = std::numeric_limits<double>::infinity();
};

PhysicsEnergy physics_energy(const SceneGraph& g, const RunConfig& cfg, const SimOptions& sim = {});

struct SearchRecord {
  int node = 0;
  int candidate = 0;
  PhysicsEnergy energy;
  AdjustLog adjust;
  bool chosen = false;
  std::string error;  // set when adjust failed
};

struct SearchResult {
  SceneGraph graph;
  std::vector<SearchRecord> log;
};

/// Breadth-first over the topology; each node takes the candidate of least
/// physics energy given its finalized ancestors and earlier nodes (ties:
/// lower index). The root comes from `topology`.
SearchResult tree_search(const SceneGraph& topology, const std::map<int, std::vector<Candidate>>& candidates,
                         const RunConfig& cfg, const SimOptions& sim = {});

/// Installs and adjusts the given candidate of every node in BFS order and
/// returns the physics energy of the full graph (the exhaustive oracle).
PhysicsEnergy evaluate_assignment(const SceneGraph& topology, const std::map<int, std::vector<Candidate>>& candidates,
                                  const std::map<int, int>& choice, const RunConfig& cfg, const SimOptions& sim = {},
                                  SceneGraph* out = nullptr);

std::string search_log_jsonl(const std::vector<SearchRecord>& log);

}  // namespace sceneforge
