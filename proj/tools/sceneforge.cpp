// sceneforge: scene generation, observation rendering, reconstruction,
// simulation and evaluation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "sceneforge/cli/pipeline.hpp"
#include "sceneforge/eval/metrics.hpp"
#include "sceneforge/physics/simulator.hpp"
#include "sceneforge/scene/config.hpp"
#include "sceneforge/synth/scene_spec.hpp"
#include "sceneforge/util/error.hpp"
#include "sceneforge/util/log.hpp"
#include "sceneforge/util/parallel.hpp"

namespace fs = std::filesystem;
using namespace sceneforge;

namespace {

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::unresolved_penetration: return 2;
    case ErrorCode::empty_instance: return 3;
    case ErrorCode::simulation_diverged: return 4;
    case ErrorCode::io:
    case ErrorCode::missing_asset: return 5;
    default: return 1;
  }
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot read " + p.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot write " + p.string());
  f << text;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::string out;

  RunConfig run_config() const {
    RunConfig cfg = config.empty() ? RunConfig{} : load_config(config);
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
  }
};

void add_common(CLI::App* app, Common& c, bool out_required) {
  app->add_option("--config", c.config, "TOML file of run configuration fields");
  app->add_option("--seed", c.seed, "Seed overriding the configuration");
  app->add_option("--jobs", c.jobs, "Worker thread cap (0: all cores)")->check(CLI::NonNegativeNumber);
  auto* o = app->add_option("--out", c.out, "Output path");
  if (out_required) o->required();
}

// A pipeline output directory holds scene/; a bundle holds gt/.
fs::path scene_dir(const fs::path& p) {
  if (fs::exists(p / "scene.json")) return p;
  if (fs::exists(p / "scene" / "scene.json")) return p / "scene";
  if (fs::exists(p / "gt" / "scene.json")) return p / "gt";
  fail(ErrorCode::io, "no scene graph under " + p.string());
}

int cmd_gen_scene(const std::string& source, const Common& c, std::optional<int> views) {
  const RunConfig cfg = c.run_config();
  SceneSpec spec = fs::is_regular_file(source) ? scene_spec_from_json(read_file(source), source) : preset(source);
  if (c.seed) spec.seed = *c.seed;
  const auto gs = generate_scene(spec, cfg.density);
  save_scene_bundle(gs, scene_trajectory(gs.spec, views.value_or(cfg.views)), c.out);
  const auto v = validate(gs.graph);
  std::printf("scene %s: %zu nodes, %zu violations\n", gs.spec.name.c_str(), gs.graph.nodes.size(), v.size());
  return 0;
}

int cmd_render_obs(const std::string& dir, const Common& c, std::optional<int> views) {
  const RunConfig cfg = c.run_config();
  const int n = views.value_or(cfg.views);
  require(n > 0, "render-obs: views must be positive");
  const SceneSpec spec = load_bundle_spec(dir);
  const auto obs = render_scene(spec, n);
  std::vector<int> ids;
  for (const auto& o : spec.objects) ids.push_back(o.id);
  save_observation_set(obs, ids, c.out);
  std::printf("rendered %zu views\n", obs.size());
  return 0;
}

int cmd_pipeline(const std::string& obs_dir, const Common& c, const std::string& gt) {
  const RunConfig cfg = c.run_config();
  if (!fs::is_directory(obs_dir)) fail(ErrorCode::io, "missing observation directory " + obs_dir);
  const auto obs = load_observations(obs_dir);
  const auto ids = load_instance_ids(obs_dir, obs);
  const auto r = run_pipeline(obs, ids, cfg);
  std::optional<MetricReport> metrics;
  std::string name = "scene";
  if (!gt.empty()) {
    const SceneGraph g = load_scene(scene_dir(gt));
    metrics = scene_report(r.graph, g, cfg);
    name = fs::path(gt).filename().string();
  }
  write_pipeline_outputs(r, cfg, c.out, metrics, name);
  std::printf("objects %zu  pene_mesh %g  weighted energy %.6g\n", r.graph.object_ids().size(), r.energy.pene_mesh,
              r.energy.weighted_total);
  if (metrics)
    std::printf("cd %.4f  f1 %.2f  nc %.2f  stable(all) %.1f  stable(ground) %.1f  OR %.1f\n", metrics->cd,
                metrics->f1, metrics->nc, metrics->stable_all, metrics->stable_ground, metrics->or_ratio);
  return 0;
}

int cmd_simulate(const std::string& dir, double duration, const Common& c) {
  const RunConfig cfg = c.run_config();
  require(duration > 0, "simulate: duration must be positive");
  const SceneGraph g = load_scene(scene_dir(dir));
  SimOptions so;
  so.dt = cfg.sim_dt;
  const SimTrace trace = simulate(g, {}, duration, so);
  if (!c.out.empty()) write_file(c.out, trace_jsonl(trace));
  const auto st = classify_stability(g, duration, cfg.stable_translation, cfg.stable_rotation, so);
  for (const auto& [id, d] : st.diffs)
    std::printf("node %d  translation %.6f m  rotation %.6f rad  %s\n", id, d.trans, d.rad,
                st.stable.at(id) ? "stable" : "unstable");
  std::printf("Stable%% %.1f\n", st.stable_percent);
  return 0;
}

int cmd_eval(const std::vector<std::string>& dirs, const Common& c) {
  const RunConfig cfg = c.run_config();
  require(!dirs.empty() && dirs.size() % 2 == 0, "eval: expects pairs of <pred-dir> <gt-dir>");
  std::string csv = metric_csv_header() + "\n";
  std::string json = "[\n";
  for (std::size_t i = 0; i < dirs.size(); i += 2) {
    for (const auto& d : {dirs[i], dirs[i + 1]})
      if (!fs::exists(d)) fail(ErrorCode::io, "missing directory " + d);
    const SceneGraph pred = load_scene(scene_dir(dirs[i]));
    const SceneGraph gt = load_scene(scene_dir(dirs[i + 1]));
    const auto r = scene_report(pred, gt, cfg);
    const std::string name = fs::path(dirs[i + 1]).filename().string();
    csv += metric_csv_row(name, r) + "\n";
    json += (i ? ",\n" : "") + metric_json(r);
  }
  json += "\n]\n";
  const fs::path out = c.out.empty() ? fs::path(".") : fs::path(c.out);
  fs::create_directories(out);
  write_file(out / "metrics.json", json);
  write_file(out / "metrics.csv", csv);
  std::fputs(csv.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Physically admissible scene reconstruction from posed depth and instance masks"};
  app.require_subcommand(1);

  Common gen_c, obs_c, pipe_c, sim_c, eval_c;
  std::string source, bundle, obs_dir, graph_dir, gt_dir;
  std::optional<int> gen_views, obs_views;
  double duration = 2.0;
  std::vector<std::string> eval_dirs;

  auto* gen = app.add_subcommand("gen-scene", "Generate a ground-truth scene bundle");
  gen->add_option("source", source, "Preset name or scene spec JSON")->required();
  gen->add_option("--views", gen_views, "Views in the stored trajectory");
  add_common(gen, gen_c, true);

  auto* ren = app.add_subcommand("render-obs", "Render depth, mask and camera files of a bundle");
  ren->add_option("scene-dir", bundle, "Scene bundle directory")->required();
  ren->add_option("--views", obs_views, "Number of views");
  add_common(ren, obs_c, true);

  auto* pipe = app.add_subcommand("pipeline", "Reconstruct a scene graph from observations");
  pipe->add_option("obs-dir", obs_dir, "Observation directory")->required();
  pipe->add_option("--gt", gt_dir, "Ground-truth bundle for metrics");
  add_common(pipe, pipe_c, true);

  auto* sim = app.add_subcommand("simulate", "Simulate a scene graph under gravity");
  sim->add_option("graph-dir", graph_dir, "Scene graph or pipeline output directory")->required();
  sim->add_option("--duration", duration, "Seconds")->check(CLI::PositiveNumber);
  add_common(sim, sim_c, false);

  auto* ev = app.add_subcommand("eval", "Metrics of predicted scenes against ground truth");
  ev->add_option("dirs", eval_dirs, "<pred-dir> <gt-dir> pairs")->required();
  add_common(ev, eval_c, false);

  CLI11_PARSE(app, argc, argv);

  try {
    for (const Common* c : {&gen_c, &obs_c, &pipe_c, &sim_c, &eval_c})
      if (c->jobs > 0) set_max_jobs(c->jobs);
    if (*gen) return cmd_gen_scene(source, gen_c, gen_views);
    if (*ren) return cmd_render_obs(bundle, obs_c, obs_views);
    if (*pipe) return cmd_pipeline(obs_dir, pipe_c, gt_dir);
    if (*sim) return cmd_simulate(graph_dir, duration, sim_c);
    if (*ev) return cmd_eval(eval_dirs, eval_c);
  } catch (const Error& e) {
    spdlog::error("{}: {}", to_string(e.code()), e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
