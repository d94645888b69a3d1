#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sceneforge/complete/complete.hpp"
#include "sceneforge/energy/energy.hpp"
#include "sceneforge/eval/metrics.hpp"
#include "sceneforge/obs/fusion.hpp"
#include "sceneforge/search/search.hpp"
#include "sceneforge/synth/scene_spec.hpp"

namespace sceneforge {

/// Mask label of the background (floor) in every observation.
inline constexpr int kBackgroundId = 0;

/// Rendered views of a generated scene with its trajectory.
std::vector<Observation> render_scene(const SceneSpec& spec, int views);

/// Writes the frames plus instances.json (the object ids of the scene).
void save_observation_set(const std::vector<Observation>& obs, const std::vector<int>& instances,
                          const std::filesystem::path& dir);
/// Instance ids from instances.json, or the visible non-background ids when
/// the file is absent.
std::vector<int> load_instance_ids(const std::filesystem::path& dir, const std::vector<Observation>& obs);

struct Stage3Record {
  int node = 0;
  double iso = 0.0;
  bool reextracted = false;
};

struct PipelineResult {
  double floor_z = 0.0;
  std::map<int, FusedInstance> fused;
  /// Fused meshes as bodies with the inferred support tree.
  SceneGraph stage1;
  std::map<int, std::vector<Candidate>> candidates;  // by ascending score
  std::vector<SearchRecord> log;
  std::vector<Stage3Record> stage3;
  SceneGraph graph;
  EnergyReport energy;
  std::vector<std::string> warnings;
};

/// Fuse every instance, infer support, propose and score candidates, tree
/// search with adjustment, then re-extract surfaces. Throws empty-instance
/// for an instance that is never visible and unresolved-penetration when
/// the search cannot place a node.
PipelineResult run_pipeline(const std::vector<Observation>& obs, const std::vector<int>& instances,
                            const RunConfig& cfg);

/// scene/, stage1/, candidates/, energy.json, search_log.jsonl,
/// stage3.json and, when given, metrics.json and metrics.csv.
void write_pipeline_outputs(const PipelineResult& r, const RunConfig& cfg, const std::filesystem::path& dir,
                            const std::optional<MetricReport>& metrics = std::nullopt,
                            const std::string& scene_name = "scene");

}  // namespace sceneforge
