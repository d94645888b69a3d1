#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sceneforge/geom/trimesh.hpp"
#include "sceneforge/scene/config.hpp"
#include "sceneforge/scene/scene_graph.hpp"

namespace sceneforge {

struct SurfaceMetrics {
  double cd = 0.0;   // metres
  double f1 = 0.0;   // percent
  double nc = 0.0;   // percent
  double precision = 0.0;
  double recall = 0.0;
};

struct MetricOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 0xe7a1;
  double tau = 0.05;
};

/// Both meshes are sampled with the same seed. cd is the mean of the two
/// directed mean nearest-sample distances; f1 is the harmonic mean of
/// precision (pred samples within tau of gt) and recall; nc is the mean
/// absolute cosine between matched face normals over both directions.
/// Throws undefined-metric on an empty mesh.
SurfaceMetrics chamfer_f1_nc(const TriMesh& pred, const TriMesh& gt, const MetricOptions& opt = {});

/// Percent of gt ids with a nonempty predicted mesh.
double object_recovery(const SceneGraph& pred, const std::vector<int>& gt_ids);

struct ObjectMetrics {
  int id = 0;
  SurfaceMetrics surface;
  bool stable = false;
  bool on_ground = false;
};

struct MetricReport {
  double cd = 0.0;  // metres x 100
  double f1 = 0.0;
  double nc = 0.0;
  double stable_ground = 0.0;
  double stable_all = 0.0;
  double or_ratio = 0.0;
  int pene_mesh = 0;
  std::vector<ObjectMetrics> objects;
};

/// Whole-scene surface metrics use the merged object meshes (background
/// excluded). Stable (Ground) covers objects supported by the root.
MetricReport scene_report(const SceneGraph& pred, const SceneGraph& gt, const RunConfig& cfg);

std::string metric_json(const MetricReport& r);
std::string metric_csv_header();
std::string metric_csv_row(const std::string& scene, const MetricReport& r);

}  // namespace sceneforge
