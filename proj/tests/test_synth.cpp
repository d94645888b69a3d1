#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sceneforge/cli/pipeline.hpp"
#include "sceneforge/energy/energy.hpp"
#include "sceneforge/synth/scene_spec.hpp"
#include "sceneforge/util/error.hpp"

using namespace sceneforge;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / "sceneforge_test_synth" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("table preset") {
  const auto s = generate_scene(preset("table-3items"));
  CHECK(s.graph.nodes.size() == 5);
  CHECK(validate(s.graph).empty());
  CHECK(e_pene_mesh(s.graph) == 0.0);
  for (int id : {2, 3, 4}) CHECK(s.graph.parent(id) == 1);
  CHECK(s.graph.parent(1) == 0);
}

TEST_CASE("every preset generates a valid penetration-free scene") {
  for (const auto& name : preset_names()) {
    INFO(name);
    const auto s = generate_scene(preset(name));
    CHECK(validate(s.graph).empty());
    CHECK(e_pene_mesh(s.graph) == 0.0);
  }
}

TEST_CASE("overlapping placements are drop-resolved") {
  SceneSpec spec;
  spec.name = "overlap";
  for (int id : {1, 2})
    spec.objects.push_back({id, "box", AnalyticSdf::box(Vec3(0.1, 0.1, 0.1)),
                            RigidTransform::from_translation(Vec3(0.02 * id, 0, 0.1)), std::nullopt});
  const auto s = generate_scene(spec);
  CHECK(e_pene_mesh(s.graph) == 0.0);
  CHECK(s.graph.parent(2) == 1);
  CHECK(s.spec.objects[1].pose.translation.z() > 0.25);
  CHECK_FALSE(s.warnings.empty());
}

TEST_CASE("unknown preset lists the presets") {
  try {
    preset("no-such-scene");
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string what = e.what();
    for (const auto& n : preset_names()) CHECK(what.find(n) != std::string::npos);
  }
}

TEST_CASE("scene spec JSON") {
  const auto spec = preset("shelf-2");
  const auto back = scene_spec_from_json(scene_spec_json(spec), "spec");
  CHECK(scene_spec_json(back) == scene_spec_json(spec));

  const std::string bad = R"({"objects": [{"id": 1, "shape": {"kind": "box", "params": [0.1, -0.1, 0.1]}}]})";
  try {
    scene_spec_from_json(bad, "spec");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    CHECK(std::string(e.what()).find("objects[0].shape") != std::string::npos);
  }
  CHECK_THROWS_AS(scene_spec_from_json(R"({"objects": []})", "spec"), Error);
}

TEST_CASE("rendering is deterministic") {
  const auto gs = generate_scene(preset("edge-balance"));
  const auto a = scratch("a"), b = scratch("b");
  save_observation_set(render_scene(gs.spec, 3), {1, 2}, a);
  save_observation_set(render_scene(gs.spec, 3), {1, 2}, b);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
  }
  CHECK(files == 3 * 4 + 1);
  CHECK_THROWS_AS(render_scene(gs.spec, 0), Error);
  CHECK(load_instance_ids(a, {}) == std::vector<int>{1, 2});
}

TEST_CASE("an instance that is never visible is an empty instance") {
  const auto gs = generate_scene(preset("edge-balance"));
  const auto obs = render_scene(gs.spec, 4);
  RunConfig cfg;
  try {
    run_pipeline(obs, {1, 2, 9}, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_instance);
    CHECK(std::string(e.what()).find('9') != std::string::npos);
  }
}
