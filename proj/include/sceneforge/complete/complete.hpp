#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sceneforge/geom/sdf_grid.hpp"
#include "sceneforge/geom/trimesh.hpp"
#include "sceneforge/obs/camera.hpp"
#include "sceneforge/obs/fusion.hpp"
#include "sceneforge/scene/config.hpp"

namespace sceneforge {

enum class Provenance { closure, mirror, hull, extrude, perturb };
const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct CandidateScore {
  double mask = 0.0;
  double depth = 0.0;
  double normal = 0.0;
  /// Fraction of the candidate's surface, seen from the virtual views, that
  /// lies in carved free space.
  double silhouette = 0.0;
  double weighted = 0.0;
};

/// A complete shape hypothesis. sdf and mesh live in the object frame;
/// `pose` maps it to the world.
struct Candidate {
  int instance = 0;
  SdfGrid sdf;
  TriMesh mesh;
  RigidTransform pose;
  Provenance provenance = Provenance::closure;
  std::uint64_t seed = 0;
  /// max |candidate - fused| over observed voxels.
  double observed_deviation = 0.0;
  std::optional<CandidateScore> score;
};

struct SamplerSpec {
  std::vector<Provenance> kinds{Provenance::extrude, Provenance::mirror, Provenance::hull,
                                Provenance::closure, Provenance::perturb};
  int samples_per_instance = 3;
  std::uint64_t seed = 0;
  double closing_radius_voxels = 3.0;
  double noise_amplitude_voxels = 1.5;  // at most 2
  int hull_directions = 256;

  static SamplerSpec from_config(const RunConfig& cfg);
};

/// What the rest of the scene says about one instance.
struct CompletionContext {
  /// World height of the surface the instance rests on.
  std::optional<double> support_z;
  /// Other instances; their observed inside is never claimed.
  std::vector<const FusedInstance*> others;
};

/// Height of the highest observed surface under the instance's footprint
/// among `others`, or `floor_z` when none is found.
double estimate_support_z(const FusedInstance& f, const std::vector<const FusedInstance*>& others,
                          double floor_z);

/// Exactly samples_per_instance candidates; kind k is kinds[k % kinds.size()].
/// Unknown voxels (unobserved and not carved) are filled by the kind's rule;
/// observed voxels keep the fused value. Throws no-candidates when the
/// fusion has no inside voxel.
std::vector<Candidate> propose(const FusedInstance& fused, const SamplerSpec& spec,
                               const CompletionContext& ctx = {});

/// Observation terms at the real views over the instance's pixels (things
/// observed in front of the candidate occlude it), plus the carved-space
/// fraction from the virtual views.
Candidate score(Candidate c, const FusedInstance& fused, const std::vector<Observation>& obs,
                const std::vector<Camera>& virtual_views, const RunConfig& cfg);

/// Ring of `count` cameras at 30 degrees elevation framing the instance.
std::vector<Camera> virtual_cameras(const FusedInstance& fused, int count);

/// candidates/<instance>/<k>.{obj,sdfgrid,json} under `dir`.
void dump_candidates(const std::vector<Candidate>& cs, const std::filesystem::path& dir);

}  // namespace sceneforge
