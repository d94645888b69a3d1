#pragma once

#include <map>
#include <string>
#include <vector>

#include "sceneforge/physics/mass.hpp"
#include "sceneforge/scene/scene_graph.hpp"

namespace sceneforge {

inline constexpr double kGravity = 9.81;

struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

/// External action per step. `gravity` adds (0, 0, -9.81 m) to every body.
struct SimAction {
  bool gravity = false;
  std::map<int, Wrench> wrenches;

  static SimAction gravity_only() { return {true, {}}; }
};

struct BodyState {
  RigidTransform pose;
  Vec3 linear_velocity = Vec3::Zero();   // of the centre of mass
  Vec3 angular_velocity = Vec3::Zero();  // world frame
};

using SimStates = std::map<int, BodyState>;
using Poses = std::map<int, RigidTransform>;

struct ContactEvent {
  int step = 0;
  int a = 0;  // body whose surface point penetrates
  int b = 0;  // body whose distance field is entered
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();  // out of b
  double depth = 0.0;
};

struct SimTrace {
  double dt = 0.0;
  std::vector<Poses> frames;  // frames[0] = initial states
  std::vector<ContactEvent> contacts;  // deepest contact per pair and step
};

struct SimOptions {
  double dt = 2e-3;
  /// Natural frequency (rad/s) of each contact pair: total normal stiffness
  /// is reduced mass x omega^2.
  double contact_omega = 1000.0;
  /// Upper bound on omega x substep.
  double max_omega_substep = 0.5;
  /// Velocity scale of the regularised Coulomb friction.
  double friction_velocity = 0.01;
  /// Target number of contact points per body.
  int contact_points = 512;
  bool record_frames = true;
  bool record_contacts = true;
};

/// Precomputed simulation world for one scene graph. Node SDFs and meshes
/// are object-frame; the root never moves.
class Simulator {
 public:
  Simulator(const SceneGraph& g, const SimOptions& opt = {});

  SimStates initial_states() const;
  /// One step of length opt.dt, split into internal substeps.
  void step(SimStates& states, const SimAction& action, int step_index,
            std::vector<ContactEvent>* events = nullptr) const;

  const SimOptions& options() const { return opt_; }
  int substeps() const { return substeps_; }
  double kinetic_energy(const SimStates& s) const;

 private:
  struct Body;
  struct ContactPoint {
    Vec3 local;
    double weight;
  };

  void substep(SimStates& states, const SimAction& action, double h, int step_index,
               std::vector<ContactEvent>* events) const;

  const SceneGraph* graph_;
  SimOptions opt_;
  int substeps_ = 1;
  std::vector<std::shared_ptr<Body>> bodies_;
};

/// Free-function form of a single step (builds the world each call).
SimStates sim_step(const SimStates& states, const SimAction& action, const SceneGraph& g,
                   double dt, SimOptions opt = {});

/// Fixed-step simulation for `duration` seconds.
SimTrace simulate(const SceneGraph& g, const SimAction& action, double duration,
                  const SimOptions& opt = {});

Poses poses_of(const SceneGraph& g);
Poses poses_of(const SimStates& s);

struct NodeDiff {
  double trans = 0.0;
  double rad = 0.0;
};

struct DiffResult {
  std::map<int, NodeDiff> per_node;
  double sum = 0.0;
};

/// Translation and rotation of the relative transform a^-1 b per node.
DiffResult diff(const Poses& a, const Poses& b);

/// Diff between the initial poses and the poses after a gravity-only run.
double e_stable(const SceneGraph& g, double duration = 2.0, const SimOptions& opt = {});

/// Sum over support edges of the child-parent surface separation
/// (penetration counts as 0).
double e_touch(const SceneGraph& g);

struct StabilityReport {
  std::map<int, bool> stable;
  std::map<int, NodeDiff> diffs;
  double stable_percent = 100.0;  // over non-root nodes
};

StabilityReport classify_stability(const SceneGraph& g, double duration, double tau_t,
                                   double tau_r, const SimOptions& opt = {});

/// One JSON object per frame: {"t", "states", "contacts"}.
std::string trace_jsonl(const SimTrace& trace);

}  // namespace sceneforge
