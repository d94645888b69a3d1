#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sceneforge/energy/energy.hpp"
#include "sceneforge/obs/camera.hpp"
#include "sceneforge/obs/obs_energy.hpp"
#include "sceneforge/synth/shapes.hpp"
#include "sceneforge/util/error.hpp"

using namespace sceneforge;

namespace {

SceneGraph spheres(double r, double apart, double spacing) {
  SceneGraph g;
  g.nodes[0] = node_from_shape(0, AnalyticSdf::sphere(r), RigidTransform::identity(), spacing);
  g.nodes[1] = node_from_shape(1, AnalyticSdf::sphere(r), RigidTransform::from_translation(Vec3(apart, 0, 0)),
                               spacing);
  g.edges.push_back({1, 0, RelationKind::beside});
  return g;
}

// Same formula on a dense lattice over the union of the node grids; the
// domain is every lattice point inside some node's near-surface band.
double dense_pene(const SceneGraph& g, int n) {
  Aabb box;
  std::vector<const SceneNode*> nodes;
  for (const auto& [id, node] : g.nodes) {
    nodes.push_back(&node);
    const Aabb b = node.sdf.bounds();
    box.extend(node.state.apply(b.min));
    box.extend(node.state.apply(b.max));
  }
  const Vec3 step = (box.max - box.min) / n;
  double sum = 0;
  std::size_t count = 0;
  std::vector<double> v(nodes.size());
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const Vec3 x = box.min + step.cwiseProduct(Vec3(i + 0.5, j + 0.5, k + 0.5));
        bool in_band = false;
        for (std::size_t a = 0; a < nodes.size(); ++a) {
          v[a] = nodes[a]->sdf.sample(nodes[a]->state.inverse().apply(x));
          in_band |= std::abs(v[a]) < nodes[a]->sdf.truncation();
        }
        if (!in_band) continue;
        const std::size_t o = std::min_element(v.begin(), v.end()) - v.begin();
        for (std::size_t a = 0; a < nodes.size(); ++a)
          if (a != o) sum += std::max(0.0, -v[a] - v[o]);
        ++count;
      }
  return sum / count;
}

SceneGraph box_scene(int count, double gap) {
  SceneGraph g;
  g.nodes[0] = floor_node(0);
  for (int i = 1; i <= count; ++i) {
    const Vec3 half(0.1, 0.1, 0.1);
    g.nodes[i] = node_from_shape(i, AnalyticSdf::box(half), RigidTransform::from_translation(Vec3(0.3 * i - 0.6, 0, 0.1)),
                                 0.01);
    double low = 1e9;
    for (const auto& p : g.nodes[i].mesh.vertices) low = std::min(low, g.nodes[i].state.apply(p).z());
    g.nodes[i].state.translation.z() += gap - low;
    g.edges.push_back({i, 0, RelationKind::support});
  }
  return g;
}

std::vector<Observation> views_of(const SceneGraph& g, int count) {
  std::vector<Observation> out;
  for (const auto& cam : ring_cameras(Vec3(0, 0, 0.1), 1.2, count, 0.5))
    out.push_back(render_meshes(posed_meshes(g), cam));
  return out;
}

}  // namespace

TEST_CASE("e_pene_sdf") {
  CHECK(e_pene_sdf(spheres(0.3, 1.0, 0.02)) == 0.0);
  CHECK(e_pene_sdf(spheres(0.3, 0.0, 0.02)) > 0.0);

  const auto g = spheres(1.0, 1.0, 0.04);
  const double ours = e_pene_sdf(g);
  const double oracle = dense_pene(g, 128);
  MESSAGE("pene ours " << ours << " oracle " << oracle);
  CHECK(ours > 0.0);
  CHECK(std::abs(ours - oracle) <= 0.02 * oracle);

  // single node and permutation of ids
  SceneGraph one;
  one.nodes[0] = g.nodes.at(0);
  CHECK(e_pene_sdf(one) == 0.0);
}

TEST_CASE("e_pene_mesh") {
  CHECK(e_pene_mesh(box_scene(3, 1e-3)) == 0.0);
  auto g = box_scene(3, 1e-3);
  g.node(2).state.translation.x() -= 0.15;
  CHECK(e_pene_mesh(g) == 1.0);
  CHECK(intersecting_pairs(g) == std::vector<std::pair<int, int>>{{1, 2}});
  for (int i = 1; i <= 3; ++i) g.node(i).state.translation.x() = 0.05 * i;
  CHECK(e_pene_mesh(g) == 3.0);

  // relabelling nodes leaves the count unchanged
  SceneGraph p;
  p.root = 7;
  p.nodes[7] = g.nodes.at(0);
  p.nodes[3] = g.nodes.at(1);
  p.nodes[1] = g.nodes.at(2);
  p.nodes[2] = g.nodes.at(3);
  CHECK(e_pene_mesh(p) == 3.0);

  // no SDF overlap implies no mesh overlap
  const auto sep = box_scene(3, 1e-3);
  if (e_pene_sdf(sep) == 0.0) CHECK(e_pene_mesh(sep) == 0.0);
}

TEST_CASE("evaluate") {
  const auto g = box_scene(2, 1e-3);
  const auto obs = views_of(g, 4);
  RunConfig cfg;
  const auto r = evaluate(g, obs, cfg);
  CHECK(r.mask == doctest::Approx(-std::log(1 - kMaskEpsilon)));
  CHECK(r.depth <= 1e-6);
  CHECK(r.pene_mesh == 0.0);
  CHECK(r.stable <= cfg.stable_translation + cfg.stable_rotation);
  const double sum = cfg.lambda_mask * r.mask + cfg.lambda_depth * r.depth + cfg.lambda_normal * r.normal +
                     cfg.lambda_pene * (r.pene_sdf + r.pene_mesh) + cfg.lambda_touch * r.touch +
                     cfg.lambda_stable * r.stable;
  CHECK(r.weighted_total == doctest::Approx(sum));
  const auto again = evaluate(g, obs, cfg);
  CHECK(again.weighted_total == r.weighted_total);

  auto lifted = g;
  lifted.node(1).state.translation.z() += 0.1;
  const auto l = evaluate(lifted, obs, cfg);
  CHECK(l.touch == doctest::Approx(r.touch + 0.1).epsilon(0.03).scale(0));
  CHECK(l.stable >= 0.1);
  CHECK(l.mask > r.mask);
  CHECK(l.depth > r.depth);
  CHECK(l.normal > r.normal);

  RunConfig zero = cfg;
  zero.lambda_mask = zero.lambda_depth = zero.lambda_normal = 0;
  zero.lambda_pene = zero.lambda_touch = zero.lambda_stable = 0;
  const auto z = evaluate(lifted, obs, zero);
  CHECK(z.weighted_total == 0.0);
  CHECK(z.touch > 0.0);
  CHECK(energy_json(z, zero).find("\"total\"") != std::string::npos);

  CHECK_THROWS_AS(evaluate(g, {}, cfg), Error);
}

TEST_CASE("touch is monotone in lift") {
  const auto g = box_scene(1, 0.0);
  double prev = e_touch(g);
  for (double d = 0.02; d <= 0.2 + 1e-9; d += 0.02) {
    auto h = g;
    h.node(1).state.translation.z() += d;
    const double t = e_touch(h);
    CHECK(t >= prev);
    prev = t;
  }
}
