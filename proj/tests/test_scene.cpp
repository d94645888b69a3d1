#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sceneforge/scene/config.hpp"
#include "sceneforge/scene/scene_graph.hpp"
#include "sceneforge/util/error.hpp"
#include "sceneforge/util/rng.hpp"
#include "test_util.hpp"

using namespace sceneforge;
using namespace sceneforge::testing;
namespace fs = std::filesystem;

namespace {

SceneGraph bare_graph(int n) {
  SceneGraph g;
  for (int i = 0; i < n; ++i) g.nodes[i].id = i;
  return g;
}

bool has_kind(const std::vector<Violation>& v, Violation::Kind k) {
  for (const auto& x : v)
    if (x.kind == k) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

SceneGraph five_node_graph() {
  SceneGraph g;
  for (int i = 0; i < 5; ++i) {
    SceneNode n;
    n.id = i;
    n.label = "obj" + std::to_string(i);
    n.sdf = sphere_grid(0.1 + 0.02 * i, 12);
    n.mesh = marching_cubes(n.sdf);
    n.state = {Quat(Eigen::AngleAxisd(0.3 * i, Vec3(1, 2, 3).normalized())), Vec3(0.1 * i, -0.37, 1.0 / 3.0)};
    n.physics = {1.5 + i, 0.6, 0.05, 0.1};
    g.nodes[i] = n;
  }
  g.edges = {{1, 0, RelationKind::support}, {2, 1, RelationKind::support},
             {3, 1, RelationKind::support}, {4, 0, RelationKind::support},
             {2, 3, RelationKind::beside}};
  return g;
}

}  // namespace

TEST_CASE("validate") {
  CHECK(validate(bare_graph(1)).empty());

  auto cyc = bare_graph(3);
  cyc.edges = {{1, 2, RelationKind::support}, {2, 1, RelationKind::support}};
  const auto v = validate(cyc);
  REQUIRE(has_kind(v, Violation::Kind::cycle));
  for (const auto& x : v)
    if (x.kind == Violation::Kind::cycle) CHECK(x.ids == std::vector<int>{1, 2});

  auto beside = bare_graph(4);
  beside.edges = {{1, 0, RelationKind::support}, {2, 1, RelationKind::support},
                  {3, 0, RelationKind::support}, {2, 3, RelationKind::beside}};
  CHECK(has_kind(validate(beside), Violation::Kind::non_sibling_beside));
  beside.edges.back() = {1, 3, RelationKind::beside};
  CHECK(validate(beside).empty());

  auto bad = bare_graph(3);
  bad.edges = {{1, 0, RelationKind::support}, {1, 2, RelationKind::support},
               {2, 7, RelationKind::support}, {0, 1, RelationKind::support}};
  const auto vb = validate(bad);
  CHECK(has_kind(vb, Violation::Kind::multiple_parents));
  CHECK(has_kind(vb, Violation::Kind::dangling_edge));
  CHECK(has_kind(vb, Violation::Kind::root_has_parent));
  CHECK(has_kind(vb, Violation::Kind::no_parent));

  auto col = bare_graph(3);
  col.edges = {{1, 0, RelationKind::support}, {2, 0, RelationKind::support},
               {1, 2, RelationKind::collide}};
  CHECK(has_kind(validate(col), Violation::Kind::collide_edge));
}

TEST_CASE("support_chain") {
  auto g = bare_graph(3);
  g.edges = {{1, 0, RelationKind::support}, {2, 1, RelationKind::support}};
  CHECK(support_chain(g, 0) == std::vector<int>{0});
  CHECK(support_chain(g, 2) == std::vector<int>{2, 1, 0});
  CHECK_THROWS_AS(support_chain(g, 9), Error);
}

TEST_CASE("random trees: chain length, bfs coverage, validity") {
  Rng rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.next() % 30);
    auto g = bare_graph(n);
    for (int i = 1; i < n; ++i) g.set_parent(i, static_cast<int>(rng.next() % i));
    REQUIRE(validate(g).empty());
    for (int i = 0; i < n; ++i) CHECK(support_chain(g, i).size() <= static_cast<std::size_t>(n));
    const auto order = g.bfs_order();
    CHECK(order.size() == static_cast<std::size_t>(n));
    CHECK(std::set<int>(order.begin(), order.end()).size() == order.size());
    std::set<int> seen;
    for (int id : order) {
      if (id != g.root) CHECK(seen.count(*g.parent(id)) == 1);
      seen.insert(id);
    }
  }
}

TEST_CASE("save and load") {
  const auto dir = fs::temp_directory_path() / "sceneforge_scene_io";
  fs::remove_all(dir);
  const auto g = five_node_graph();
  REQUIRE(validate(g).empty());
  save_scene(g, dir / "a");
  const auto back = load_scene(dir / "a");
  CHECK(back == g);

  save_scene(back, dir / "b");
  CHECK(slurp(dir / "a" / "scene.json") == slurp(dir / "b" / "scene.json"));
  CHECK(slurp(dir / "a" / "sdf" / "3.sdfgrid") == slurp(dir / "b" / "sdf" / "3.sdfgrid"));

  {
    std::string text = slurp(dir / "a" / "scene.json");
    const auto at = text.find("\"beside\"");
    text.replace(at, 8, "\"nearby\"");
    std::ofstream(dir / "a" / "scene.json", std::ios::binary) << text;
    try {
      load_scene(dir / "a");
      FAIL("expected parse error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::parse);
      CHECK(std::string(e.what()).find("kind") != std::string::npos);
    }
  }

  fs::remove(dir / "b" / "meshes" / "2.obj");
  try {
    load_scene(dir / "b");
    FAIL("expected missing asset error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_asset);
    CHECK(std::string(e.what()).find("2.obj") != std::string::npos);
  }
}

TEST_CASE("config") {
  const RunConfig d;
  CHECK(d.lambda_mask == 0.5);
  CHECK(d.lambda_depth == 10.0);
  CHECK(d.lambda_normal == 10.0);
  CHECK(d.lambda_pene == 5.0);
  CHECK(d.samples_per_instance == 3);

  const auto c = config_from_toml(
      "# comment\n[energy]\nlambda_mask = 1.25  # trailing\nseed = 42\n"
      "sampler_kinds = [\"mirror\", \"hull\"]\nsamples_per_instance = 5\n",
      "inline");
  CHECK(c.lambda_mask == 1.25);
  CHECK(c.seed == 42);
  CHECK(c.samples_per_instance == 5);
  CHECK(c.sampler_kinds == std::vector<std::string>{"mirror", "hull"});
  CHECK_THROWS_AS(config_from_toml("nonsense_key = 1\n", "inline"), Error);
  CHECK_THROWS_AS(config_from_toml("lambda_pene = -1\n", "inline"), Error);
  CHECK_THROWS_AS(config_from_toml("samples_per_instance = 0\n", "inline"), Error);
  CHECK_THROWS_AS(config_from_toml("lambda_mask = \"x\n", "inline"), Error);
}
