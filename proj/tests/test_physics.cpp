#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "sceneforge/physics/mass.hpp"
#include "sceneforge/physics/simulator.hpp"
#include "sceneforge/synth/shapes.hpp"
#include "sceneforge/util/error.hpp"

using namespace sceneforge;

namespace {

constexpr double kSpacing = 0.01;

SceneGraph floor_only() {
  SceneGraph g;
  g.nodes[0] = floor_node(0);
  return g;
}

void add_box(SceneGraph& g, int id, int parent, const Vec3& half, const Vec3& center) {
  g.nodes[id] = node_from_shape(id, AnalyticSdf::box(half), RigidTransform::from_translation(center), kSpacing);
  g.edges.push_back({id, parent, RelationKind::support});
}

// Lowest mesh vertex of a node in world z.
double bottom_z(const SceneNode& n) {
  double z = 1e9;
  for (const auto& v : n.mesh.vertices) z = std::min(z, n.state.apply(v).z());
  return z;
}

SceneGraph resting_box(double gap = 0.0) {
  auto g = floor_only();
  add_box(g, 1, 0, Vec3(0.1, 0.1, 0.1), Vec3(0, 0, 0.1));
  g.node(1).state.translation.z() += gap - bottom_z(g.node(1));
  return g;
}

}  // namespace

TEST_CASE("mass properties of a box") {
  const auto m = mass_properties(make_box_mesh(Vec3(0.1, 0.2, 0.3), 2), 300.0);
  CHECK(m.mass == doctest::Approx(300 * 0.2 * 0.4 * 0.6));
  CHECK(m.com.norm() < 1e-12);
  CHECK(m.inertia(0, 0) == doctest::Approx(m.mass / 12 * (0.16 + 0.36)));
  CHECK(m.inertia(2, 2) == doctest::Approx(m.mass / 12 * (0.04 + 0.16)));
  CHECK(std::abs(m.inertia(0, 1)) < 1e-12);
}

TEST_CASE("sim_step examples") {
  const auto g = resting_box();
  Simulator sim(g);
  auto s = sim.initial_states();
  const Vec3 before = s[1].pose.translation;
  sim.step(s, SimAction::gravity_only(), 1);
  CHECK((s[1].pose.translation - before).norm() <= 1e-5);

  // free body, nothing acting on it
  SceneGraph free_g;
  free_g.nodes[0] = floor_node(0);
  add_box(free_g, 1, 0, Vec3(0.1, 0.1, 0.1), Vec3(0, 0, 1.0));
  auto s0 = Simulator(free_g).initial_states();
  const auto s1 = sim_step(s0, SimAction{}, free_g, 2e-3);
  CHECK(s1.at(1).pose == s0.at(1).pose);
  CHECK(s1.at(0).pose == s0.at(0).pose);

  SimOptions bad;
  CHECK_THROWS_AS(sim_step(s0, SimAction{}, free_g, 6e-3, bad), Error);
}

TEST_CASE("dropped box settles") {
  auto g = resting_box(0.5);
  SimOptions opt;
  Simulator sim(g, opt);
  auto s = sim.initial_states();
  const double ke0 = sim.kinetic_energy(s);
  CHECK(ke0 == 0.0);
  for (int k = 1; k <= 1000; ++k) sim.step(s, SimAction::gravity_only(), k);
  CHECK(std::abs(s[1].linear_velocity.z()) < 1e-3);
  // resting on the floor: bottom at z ~ 0
  auto settled = g;
  settled.node(1).state = s[1].pose;
  CHECK(std::abs(bottom_z(settled.node(1))) < 2e-3);
}

TEST_CASE("equilibrium drift and penetration bound") {
  const auto g = resting_box();
  const auto trace = simulate(g, SimAction::gravity_only(), 2.0);
  double drift = 0;
  for (const auto& f : trace.frames)
    drift = std::max(drift, (f.at(1).translation - trace.frames.front().at(1).translation).norm());
  CHECK(drift <= 1e-4);
  double deepest = 0;
  for (const auto& c : trace.contacts) deepest = std::max(deepest, c.depth);
  CHECK(deepest <= 2e-3);
  CHECK(trace.frames.back().at(0) == trace.frames.front().at(0));
  CHECK(trace_jsonl(trace).size() > 0);
}

TEST_CASE("stacked boxes stay, overhanging box topples") {
  auto g = resting_box();
  add_box(g, 2, 1, Vec3(0.08, 0.08, 0.08), Vec3(0.02, 0, 0.3));
  g.node(2).state.translation.z() += bottom_z(g.node(1)) + 0.2 - bottom_z(g.node(2));
  const auto d = diff(poses_of(g), simulate(g, SimAction::gravity_only(), 2.0).frames.back());
  CHECK(d.per_node.at(1).trans <= 0.02);
  CHECK(d.per_node.at(2).trans <= 0.02);
  CHECK(d.per_node.at(2).rad <= 0.0873);

  // table = slab on a single pedestal; the box rests on the slab edge with
  // its centre of mass beyond it
  auto t = floor_only();
  add_box(t, 1, 0, Vec3(0.3, 0.3, 0.2), Vec3(0, 0, 0.2));
  t.node(1).state.translation.z() -= bottom_z(t.node(1));
  add_box(t, 2, 1, Vec3(0.1, 0.1, 0.1), Vec3(0.35, 0, 0.5));
  t.node(2).state.translation.z() += 0.4 - bottom_z(t.node(2));
  const auto dt = diff(poses_of(t), simulate(t, SimAction::gravity_only(), 2.0).frames.back());
  CHECK(dt.per_node.at(2).trans > 0.1);
  CHECK(dt.per_node.at(1).trans <= 0.02);

  CHECK_THROWS_AS(simulate(t, SimAction::gravity_only(), 0.0), Error);
}

TEST_CASE("diff") {
  Poses a{{0, RigidTransform::identity()}, {1, RigidTransform::from_translation(Vec3(1, 2, 3))}};
  CHECK(diff(a, a).sum == 0.0);
  Poses b = a;
  b[1].translation += Vec3(0.1, 0, 0);
  const auto d = diff(a, b);
  CHECK(d.per_node.at(1).trans == doctest::Approx(0.1).epsilon(1e-12).scale(0));
  CHECK(d.per_node.at(1).rad == 0.0);
  CHECK(d.sum == doctest::Approx(0.1).epsilon(1e-12).scale(0));
  Poses c = a;
  c[1].rotation = Quat(Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitZ()));
  CHECK(std::abs(diff(a, c).per_node.at(1).rad - std::numbers::pi / 2) <= 1e-9);
  CHECK(std::abs(diff(a, c).sum - diff(c, a).sum) <= 1e-12);
  Poses missing{{0, RigidTransform::identity()}};
  CHECK_THROWS_AS(diff(a, missing), Error);
}

TEST_CASE("e_stable") {
  CHECK(e_stable(floor_only()) == 0.0);
  CHECK(e_stable(resting_box()) <= 0.02 + 0.0873);
  CHECK(e_stable(resting_box(0.1)) >= 0.1);
}

TEST_CASE("e_touch") {
  CHECK(e_touch(resting_box()) <= 1e-3);
  CHECK(e_touch(resting_box(0.05)) == doctest::Approx(0.05).epsilon(0.02).scale(0));
  auto g = resting_box(0.05);
  add_box(g, 2, 1, Vec3(0.05, 0.05, 0.05), Vec3(0, 0, 0));
  g.node(2).state.translation.z() += bottom_z(g.node(1)) + 0.2 + 0.05 - bottom_z(g.node(2));
  CHECK(e_touch(g) == doctest::Approx(0.10).epsilon(0.02).scale(0));
}

TEST_CASE("classify_stability") {
  auto g = floor_only();
  for (int i = 1; i <= 4; ++i) {
    add_box(g, i, 0, Vec3(0.1, 0.1, 0.1), Vec3(0.4 * i - 1.0, 0, 0.1));
    g.node(i).state.translation.z() -= bottom_z(g.node(i));
  }
  CHECK(classify_stability(g, 1.0, 0.02, 0.0873).stable_percent == 100.0);
  g.node(3).state.translation.z() += 0.2;
  const auto r = classify_stability(g, 1.0, 0.02, 0.0873);
  CHECK(r.stable_percent == 75.0);
  CHECK_FALSE(r.stable.at(3));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(classify_stability(g, 1.0, inf, inf).stable_percent == 100.0);
  CHECK_THROWS_AS(classify_stability(g, 1.0, 0.0, 1.0), Error);
}

TEST_CASE("determinism and dissipation") {
  auto g = resting_box(0.2);
  g.node(1).state.rotation = Quat(Eigen::AngleAxisd(0.3, Vec3(1, 1, 0).normalized()));
  const auto a = trace_jsonl(simulate(g, SimAction::gravity_only(), 1.0));
  const auto b = trace_jsonl(simulate(g, SimAction::gravity_only(), 1.0));
  const auto c = trace_jsonl(simulate(g, SimAction::gravity_only(), 1.0));
  CHECK(a == b);
  CHECK(b == c);

  auto r = resting_box(0.3);
  Simulator sim(r);
  auto s = sim.initial_states();
  s[1].linear_velocity = Vec3(0.5, 0, 0);
  const double ke0 = sim.kinetic_energy(s);
  for (int k = 1; k <= 1000; ++k) sim.step(s, SimAction{}, k);
  CHECK(sim.kinetic_energy(s) <= ke0);
}
