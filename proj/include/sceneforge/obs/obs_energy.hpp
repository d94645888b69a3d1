#pragma once

#include <vector>

#include "sceneforge/obs/observation.hpp"
#include "sceneforge/scene/scene_graph.hpp"

namespace sceneforge {

/// Softening of the one-hot rendered label distribution.
inline constexpr double kMaskEpsilon = 1e-3;

/// Per-pixel sums of the observation terms over a set of pixels.
struct ObsTermSums {
  double mask = 0.0;
  std::size_t mask_pixels = 0;
  double depth = 0.0;
  std::size_t depth_pixels = 0;
  double normal = 0.0;
  std::size_t normal_pixels = 0;

  void add(const ObsTermSums& o);
  double mask_mean() const;
  /// Throws undefined-energy when no pixel had both depths valid.
  double depth_mean() const;
  double normal_mean() const;
};

/// Observed-vs-rendered comparison. `observed_normals` may be empty (the
/// normal term is then skipped). When `only_label` is set, only pixels
/// where either image shows that label contribute.
ObsTermSums compare_images(const Observation& observed,
                           const std::vector<Vec3f>& observed_normals,
                           const Observation& rendered,
                           std::optional<int> only_label = std::nullopt);

/// Posed meshes of every node with a nonempty mesh.
MeshScene posed_meshes(const SceneGraph& g);

/// Term sums pooled over every pixel of every view.
ObsTermSums observation_terms(const SceneGraph& g, const std::vector<Observation>& obs);

/// Mean per-pixel cross-entropy between the observed labels and the
/// epsilon-softened one-hot rendered labels.
double mask_energy(const SceneGraph& g, const Observation& obs);
/// Mean squared depth difference over pixels valid in both images.
double depth_energy(const SceneGraph& g, const Observation& obs);
/// Mean (1 - cosine) between observed and rendered normals.
double normal_energy(const SceneGraph& g, const Observation& obs);

}  // namespace sceneforge
