#pragma once

#include <string>
#include <vector>

#include "sceneforge/obs/observation.hpp"
#include "sceneforge/physics/simulator.hpp"
#include "sceneforge/scene/config.hpp"
#include "sceneforge/scene/scene_graph.hpp"

namespace sceneforge {

/// All terms are nonnegative. weighted_total = sum of lambda * term, with
/// lambda_pene applied to both penetration terms.
struct EnergyReport {
  double mask = 0.0;
  double depth = 0.0;
  double normal = 0.0;
  double pene_sdf = 0.0;
  double pene_mesh = 0.0;  // number of intersecting node pairs
  double touch = 0.0;
  double stable = 0.0;
  double weighted_total = 0.0;

  void weigh(const RunConfig& cfg);
};

/// Hinge overlap of posed node SDFs. Each sample x belongs to the node k
/// with the smallest g_k(x) and contributes sum over j != k of
/// max(0, -g_j(x) - g_k(x)). Samples are the near-surface voxels of every
/// node (|g| < truncation), one seeded jittered point per voxel, each point
/// of the union counted once: a sample of node k is kept only when no
/// lower-numbered node has it in its band. The result is the voxel-volume
/// weighted mean over kept samples.
double e_pene_sdf(const SceneGraph& g);

/// Unordered node pairs whose posed meshes intersect, in (a < b) order.
std::vector<std::pair<int, int>> intersecting_pairs(const SceneGraph& g);
double e_pene_mesh(const SceneGraph& g);

struct EvaluateOptions {
  SimOptions sim;
  /// Skip the simulation-based term (reported as 0).
  bool skip_stable = false;
};

/// Throws precondition error on an empty observation list.
EnergyReport evaluate(const SceneGraph& g, const std::vector<Observation>& obs, const RunConfig& cfg,
                      const EvaluateOptions& opt = {});

/// Flat object of every term plus "weights" and "total".
std::string energy_json(const EnergyReport& r, const RunConfig& cfg);

}  // namespace sceneforge
