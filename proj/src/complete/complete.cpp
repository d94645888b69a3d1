#include "sceneforge/complete/complete.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "sceneforge/geom/distance_transform.hpp"
#include "sceneforge/geom/io.hpp"
#include "sceneforge/geom/marching_cubes.hpp"
#include "sceneforge/obs/obs_energy.hpp"
#include "sceneforge/util/error.hpp"
#include "sceneforge/util/parallel.hpp"
#include "sceneforge/util/rng.hpp"

namespace sceneforge {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::closure: return "closure";
    case Provenance::mirror: return "mirror";
    case Provenance::hull: return "hull";
    case Provenance::extrude: return "extrude";
    case Provenance::perturb: return "perturb";
  }
  return "?";
}

Provenance provenance_from_string(const std::string& s) {
  for (auto p : {Provenance::closure, Provenance::mirror, Provenance::hull, Provenance::extrude,
                 Provenance::perturb})
    if (s == to_string(p)) return p;
  fail(ErrorCode::parse, "unknown sampler kind '" + s + "'");
}

SamplerSpec SamplerSpec::from_config(const RunConfig& cfg) {
  SamplerSpec s;
  s.kinds.clear();
  for (const auto& k : cfg.sampler_kinds) s.kinds.push_back(provenance_from_string(k));
  s.samples_per_instance = cfg.samples_per_instance;
  s.seed = cfg.seed;
  return s;
}

namespace {

using Mask = std::vector<std::uint8_t>;

struct Voxels {
  const FusedInstance& f;
  const SdfGrid& g;
  Mask observed, unknown, inside;  // inside: observed inside

  explicit Voxels(const FusedInstance& fused) : f(fused), g(fused.sdf) {
    observed.assign(g.size(), 0);
    unknown.assign(g.size(), 0);
    inside.assign(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      observed[i] = g.weight(i) > 0;
      unknown[i] = !observed[i] && !f.carved[i];
      inside[i] = observed[i] && g.at(i) < 0;
    }
  }
};

// Marks every voxel not reachable from the grid boundary through
// non-inside voxels as inside.
void fill_cavities(Mask& inside, const std::array<int, 3>& d) {
  const std::size_t n = inside.size();
  Mask reach(n, 0);
  std::deque<std::size_t> queue;
  auto idx = [&](int x, int y, int z) { return std::size_t(x) + std::size_t(d[0]) * (y + std::size_t(d[1]) * z); };
  for (int z = 0; z < d[2]; ++z)
    for (int y = 0; y < d[1]; ++y)
      for (int x = 0; x < d[0]; ++x) {
        const bool border = x == 0 || y == 0 || z == 0 || x == d[0] - 1 || y == d[1] - 1 || z == d[2] - 1;
        const std::size_t i = idx(x, y, z);
        if (border && !inside[i]) {
          reach[i] = 1;
          queue.push_back(i);
        }
      }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const int x = int(i % d[0]), y = int((i / d[0]) % d[1]), z = int(i / (std::size_t(d[0]) * d[1]));
    const int nb[6][3] = {{x - 1, y, z}, {x + 1, y, z}, {x, y - 1, z}, {x, y + 1, z}, {x, y, z - 1}, {x, y, z + 1}};
    for (const auto& c : nb) {
      if (c[0] < 0 || c[1] < 0 || c[2] < 0 || c[0] >= d[0] || c[1] >= d[1] || c[2] >= d[2]) continue;
      const std::size_t j = idx(c[0], c[1], c[2]);
      if (!reach[j] && !inside[j]) {
        reach[j] = 1;
        queue.push_back(j);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!reach[i]) inside[i] = 1;
}

Mask closing(const Mask& inside, const std::array<int, 3>& d, double r) {
  const double r2 = r * r;
  const auto to_inside = squared_edt(inside, d);
  Mask dilated(inside.size());
  for (std::size_t i = 0; i < inside.size(); ++i) dilated[i] = to_inside[i] <= r2;
  Mask outside(inside.size());
  for (std::size_t i = 0; i < inside.size(); ++i) outside[i] = !dilated[i];
  const auto to_outside = squared_edt(outside, d);
  Mask closed(inside.size());
  for (std::size_t i = 0; i < inside.size(); ++i) closed[i] = to_outside[i] > r2;
  return closed;
}

Mask closure_rule(const Voxels& v, const SamplerSpec& spec) {
  return closing(v.inside, v.g.dims(), spec.closing_radius_voxels);
}

// Vertical mirror plane: horizontal normal along the direction of least
// spread of the observed surface. The offset maximises how much of the
// reflected surface lands back on observed surface, with reflections into
// clearly free space counted against it.
Mask mirror_rule(const Voxels& v) {
  const auto& pts = v.f.points;
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= double(pts.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector2d q(p.x() - c.x(), p.y() - c.y());
    cov += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Eigen::Vector2d e = es.eigenvectors().col(0);
  const Vec3 n(e.x(), e.y(), 0.0);

  const SdfGrid& g = v.g;
  const auto& d = g.dims();
  // Free: every node around the nearest one is carved and unobserved.
  auto free_space = [&](const std::array<int, 3>& k) {
    for (int z = k[2] - 1; z <= k[2] + 1; ++z)
      for (int y = k[1] - 1; y <= k[1] + 1; ++y)
        for (int x = k[0] - 1; x <= k[0] + 1; ++x) {
          if (x < 0 || y < 0 || z < 0 || x >= d[0] || y >= d[1] || z >= d[2]) continue;
          const std::size_t i = g.index(x, y, z);
          if (!v.f.carved[i] || v.observed[i]) return false;
        }
    return true;
  };
  const std::size_t stride = std::max<std::size_t>(1, pts.size() / 2000);
  const double extent = g.spacing() * d[0];
  double best_score = -1e300, offset = 0;
  for (int step = 0;; ++step) {
    const double t = (step % 2 ? 1 : -1) * g.spacing() * ((step + 1) / 2);
    if (std::abs(t) > extent) break;
    const Vec3 p0 = c + t * n;
    double good = 0, bad = 0;
    for (std::size_t i = 0; i < pts.size(); i += stride) {
      const Vec3 m = pts[i] - 2.0 * (pts[i] - p0).dot(n) * n;
      if (!g.inside_bounds(m)) {
        bad += 1;
        continue;
      }
      const auto k = g.nearest_node(m);
      if (free_space(k)) bad += 1;
      else if (v.observed[g.index(k[0], k[1], k[2])] && std::abs(g.sample(m)) < g.spacing()) good += 1;
    }
    const double s = good - 4.0 * bad;
    if (s > best_score) {
      best_score = s;
      offset = t;
    }
  }
  const Vec3 p0 = c + offset * n;

  Mask out = v.inside;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!v.unknown[i]) continue;
    const Vec3 x = g.point(i);
    const Vec3 m = x - 2.0 * (x - p0).dot(n) * n;
    if (!g.inside_bounds(m)) continue;
    const auto k = g.nearest_node(m);
    const std::size_t j = g.index(k[0], k[1], k[2]);
    if (v.observed[j] && g.sample(m) < 0) out[i] = 1;
  }
  return out;
}

// k-DOP over the six axes plus a Fibonacci sphere of directions.
struct Kdop {
  std::vector<Vec3> dirs;
  std::vector<double> h;
  Aabb box;

  Kdop(const FusedInstance& f, int directions, bool clip_low) {
    dirs = {Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
    const int fib = std::max(directions - 6, 0);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < fib; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / fib;
      const double r = std::sqrt(1.0 - z * z);
      dirs.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
    }
    h.assign(dirs.size(), -1e300);
    auto extend = [&](const Vec3& p) {
      box.extend(p);
      for (std::size_t i = 0; i < dirs.size(); ++i) h[i] = std::max(h[i], dirs[i].dot(p));
    };
    for (const auto& p : f.points) extend(p);
    // Clipped: the inside band reaches below the lowest seen surface.
    const double low = clip_low ? box.min.z() : -1e300;
    const SdfGrid& g = f.sdf;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g.weight(i) > 0 && g.at(i) < 0 && g.point(i).z() >= low) extend(g.point(i));
  }

  bool contains(const Vec3& x, double pad = 0.0) const {
    if (box.empty()) return false;
    for (int a = 0; a < 3; ++a)
      if (x[a] < box.min[a] - pad || x[a] > box.max[a] + pad) return false;
    for (std::size_t k = 0; k < dirs.size(); ++k)
      if (dirs[k].dot(x) > h[k] + pad) return false;
    return true;
  }

  double volume() const { return box.empty() ? 0.0 : box.extent().prod(); }
};

Mask hull_rule(const Voxels& v, const Kdop& hull) {
  Mask out = v.inside;
  for (std::size_t i = 0; i < v.g.size(); ++i)
    if (v.unknown[i]) out[i] = hull.contains(v.g.point(i));
  return out;
}

Mask extrude_rule(const Voxels& v, const CompletionContext& ctx) {
  const SdfGrid& g = v.g;
  const auto& d = g.dims();
  int low = -1;
  for (int z = 0; z < d[2] && low < 0; ++z)
    for (int y = 0; y < d[1] && low < 0; ++y)
      for (int x = 0; x < d[0]; ++x)
        if (v.inside[g.index(x, y, z)]) {
          low = z;
          break;
        }
  Mask out = v.inside;
  if (low < 0) return out;

  // Lowest inside cross-section with its holes filled.
  Mask slice(std::size_t(d[0]) * d[1], 0);
  for (int y = 0; y < d[1]; ++y)
    for (int x = 0; x < d[0]; ++x) slice[x + std::size_t(d[0]) * y] = v.inside[g.index(x, y, low)];
  {
    // 2-D fill: treat the slice as a one-voxel-thick volume padded so the
    // top and bottom faces do not count as boundary.
    Mask padded(slice.size() * 3, 1);
    std::copy(slice.begin(), slice.end(), padded.begin() + slice.size());
    const std::array<int, 3> pd{d[0], d[1], 3};
    fill_cavities(padded, pd);
    std::copy(padded.begin() + slice.size(), padded.begin() + 2 * slice.size(), slice.begin());
  }
  const double floor_z = ctx.support_z ? *ctx.support_z : g.point(0, 0, low).z();
  for (int z = low - 1; z >= 0; --z) {
    if (g.point(0, 0, z).z() < floor_z) break;
    for (int y = 0; y < d[1]; ++y)
      for (int x = 0; x < d[0]; ++x) {
        const std::size_t i = g.index(x, y, z);
        if (v.unknown[i] && slice[x + std::size_t(d[0]) * y]) out[i] = 1;
      }
  }
  return out;
}

// Seeded smooth field with |noise| <= amplitude.
struct SmoothNoise {
  std::array<Vec3, 4> k;
  std::array<double, 4> phase;
  double amplitude;

  SmoothNoise(std::uint64_t seed, double spacing, double amp) : amplitude(amp) {
    Rng rng(seed);
    for (int i = 0; i < 4; ++i) {
      Vec3 dir(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      if (dir.norm() < 1e-6) dir = Vec3::UnitX();
      const double wavelength = spacing * rng.uniform(6.0, 16.0);
      k[i] = dir.normalized() * (2.0 * std::numbers::pi / wavelength);
      phase[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
  }
  double operator()(const Vec3& x) const {
    double s = 0;
    for (int i = 0; i < 4; ++i) s += std::sin(k[i].dot(x) + phase[i]);
    return amplitude * s / 4.0;
  }
};

// Unknown voxels that belong to another instance: inside its observed
// shell, or inside the hull of a smaller instance.
struct Foreign {
  Mask owned;
  Mask barrier;  // owned, plus hulls padded by a voxel; closes sub-voxel gaps
};

Foreign foreign_mask(const Voxels& v, const CompletionContext& ctx, const std::vector<Kdop>& blockers) {
  const SdfGrid& g = v.g;
  Foreign out{Mask(g.size(), 0), Mask(g.size(), 0)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!v.unknown[i]) continue;
    const Vec3 x = g.point(i);
    for (const auto* o : ctx.others) {
      if (o->id == v.f.id || !o->sdf.inside_bounds(x)) continue;
      const auto k = o->sdf.nearest_node(x);
      if (o->sdf.weight(o->sdf.index(k[0], k[1], k[2])) > 0 && o->sdf.sample(x) < 0) {
        out.owned[i] = out.barrier[i] = 1;
        break;
      }
    }
    for (const auto& b : blockers) {
      if (out.owned[i] && out.barrier[i]) break;
      if (b.contains(x)) out.owned[i] = out.barrier[i] = 1;
      else if (b.contains(x, g.spacing())) out.barrier[i] = 1;
    }
  }
  return out;
}

Candidate finish(const Voxels& v, Mask inside, const CompletionContext& ctx, const Foreign& foreign,
                 Provenance kind, std::uint64_t seed, const SamplerSpec& spec) {
  const SdfGrid& g = v.g;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (v.observed[i]) inside[i] = v.inside[i];
    else if (!v.unknown[i]) inside[i] = 0;
  }
  // Cavities closed off by the support surface and by other bodies are filled.
  Mask closed = inside;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (foreign.barrier[i] || (ctx.support_z && g.point(i).z() < *ctx.support_z)) closed[i] = 1;
  fill_cavities(closed, g.dims());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!v.unknown[i]) continue;
    inside[i] = closed[i] && !foreign.owned[i];
  }
  const SdfGrid filled = occupancy_to_sdf(inside, g.spec());

  // Object frame: grid centre at the origin.
  const Vec3 centre = g.bounds().center();
  GridSpec local = g.spec();
  local.origin -= centre;
  SdfGrid out(local);
  const auto& d = g.dims();
  const std::optional<SmoothNoise> noise =
      kind == Provenance::perturb
          ? std::optional<SmoothNoise>(std::in_place, seed, g.spacing(),
                                       std::min(spec.noise_amplitude_voxels, 2.0) * g.spacing())
          : std::nullopt;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double val = v.unknown[i] ? filled.at(i) : g.at(i);
    if (noise && v.unknown[i]) val += (*noise)(g.point(i));
    // Nothing lies below the support surface.
    if (ctx.support_z) val = std::max(val, *ctx.support_z - g.point(i).z());
    const auto c = g.coords(i);
    const bool border = c[0] == 0 || c[1] == 0 || c[2] == 0 || c[0] == d[0] - 1 || c[1] == d[1] - 1 ||
                        c[2] == d[2] - 1;
    if (border) val = std::max(val, 0.5 * g.spacing());
    out.set(i, val);
  }

  Candidate c;
  c.instance = v.f.id;
  c.provenance = kind;
  c.seed = seed;
  c.pose = RigidTransform::from_translation(centre);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (v.observed[i]) c.observed_deviation = std::max(c.observed_deviation, double(std::abs(out.at(i) - g.at(i))));
  c.mesh = marching_cubes(out);
  c.sdf = std::move(out);
  return c;
}

}  // namespace

double estimate_support_z(const FusedInstance& f, const std::vector<const FusedInstance*>& others,
                          double floor_z) {
  Aabb box;
  for (const auto& p : f.points) box.extend(p);
  if (box.empty()) return floor_z;
  const double low = box.min.z();
  double best = floor_z;
  const double tol = 2.0 * f.sdf.spacing();
  for (const auto* o : others) {
    if (o->id == f.id) continue;
    for (const auto& p : o->points) {
      if (p.x() < box.min.x() || p.x() > box.max.x() || p.y() < box.min.y() || p.y() > box.max.y()) continue;
      if (p.z() <= low + tol && p.z() > best) best = p.z();
    }
  }
  return std::min(best, low);
}

std::vector<Candidate> propose(const FusedInstance& fused, const SamplerSpec& spec, const CompletionContext& ctx) {
  require(!spec.kinds.empty(), "propose: no sampler kind enabled");
  require(spec.samples_per_instance >= 1, "propose: samples_per_instance must be positive");
  require(fused.carved.size() == fused.sdf.size(), "propose: fused instance lacks carving");
  const Voxels v(fused);
  const Kdop own(fused, spec.hull_directions, false);
  std::vector<Kdop> blockers;
  for (const auto* o : ctx.others) {
    if (o->id == fused.id) continue;
    Kdop k(*o, spec.hull_directions, true);
    if (k.volume() < own.volume()) blockers.push_back(std::move(k));
  }
  const Foreign foreign = foreign_mask(v, ctx, blockers);
  if (std::none_of(v.inside.begin(), v.inside.end(), [](auto b) { return b != 0; }))
    fail(ErrorCode::no_candidates, "instance " + std::to_string(fused.id) + " has no inside voxels");

  std::vector<Candidate> out(spec.samples_per_instance);
  parallel_for(out.size(), [&](std::size_t k) {
    const Provenance kind = spec.kinds[k % spec.kinds.size()];
    const std::uint64_t seed = mix_seed(spec.seed, (std::uint64_t(fused.id) << 16) + k);
    Mask inside;
    switch (kind) {
      case Provenance::closure:
      case Provenance::perturb: inside = closure_rule(v, spec); break;
      case Provenance::mirror: inside = mirror_rule(v); break;
      case Provenance::hull: inside = hull_rule(v, own); break;
      case Provenance::extrude: inside = extrude_rule(v, ctx); break;
    }
    out[k] = finish(v, std::move(inside), ctx, foreign, kind, seed, spec);
  });
  for (const auto& c : out)
    if (c.mesh.empty())
      fail(ErrorCode::no_candidates, "instance " + std::to_string(fused.id) + " produced an empty candidate");
  return out;
}

std::vector<Camera> virtual_cameras(const FusedInstance& fused, int count) {
  const Aabb b = fused.sdf.bounds();
  Camera small;
  small.width = small.height = 96;
  small.cx = small.cy = 47.5;
  // Field of view about 60 degrees; the ring keeps the grid in frame.
  small.fx = small.fy = 83.0;
  const double radius = 1.2 * b.extent().norm();
  return ring_cameras(b.center(), radius, count, std::numbers::pi / 6, small);
}

namespace {

std::optional<PixelRect> footprint(const Observation& o, const Aabb& world_box, int id) {
  const RigidTransform cw = o.camera.camera_from_world();
  double u0 = 1e300, v0 = 1e300, u1 = -1e300, v1 = -1e300;
  bool behind = false;
  for (int c = 0; c < 8; ++c) {
    const Vec3 p(c & 1 ? world_box.max.x() : world_box.min.x(), c & 2 ? world_box.max.y() : world_box.min.y(),
                 c & 4 ? world_box.max.z() : world_box.min.z());
    const Vec3 q = cw.apply(p);
    if (q.z() <= 1e-6) {
      behind = true;
      break;
    }
    const auto [u, v] = o.camera.project(q);
    u0 = std::min(u0, u);
    v0 = std::min(v0, v);
    u1 = std::max(u1, u);
    v1 = std::max(v1, v);
  }
  PixelRect r{0, 0, o.camera.width, o.camera.height};
  if (!behind) {
    r.u0 = std::clamp(int(std::floor(u0)) - 1, 0, o.camera.width);
    r.v0 = std::clamp(int(std::floor(v0)) - 1, 0, o.camera.height);
    r.u1 = std::clamp(int(std::ceil(u1)) + 2, 0, o.camera.width);
    r.v1 = std::clamp(int(std::ceil(v1)) + 2, 0, o.camera.height);
  }
  // The observed pixels of the instance must be inside as well.
  for (int v = 0; v < o.camera.height; ++v)
    for (int u = 0; u < o.camera.width; ++u)
      if (o.mask[o.pixel(u, v)] == id) {
        r.u0 = std::min(r.u0, u);
        r.v0 = std::min(r.v0, v);
        r.u1 = std::max(r.u1, u + 1);
        r.v1 = std::max(r.v1, v + 1);
      }
  if (r.u0 >= r.u1 || r.v0 >= r.v1) return std::nullopt;
  return r;
}

}  // namespace

Candidate score(Candidate c, const FusedInstance& fused, const std::vector<Observation>& obs,
                const std::vector<Camera>& virtual_views, const RunConfig& cfg) {
  require(!c.mesh.empty(), "score: empty candidate mesh");
  const TriMesh world = transform_mesh(c.mesh, c.pose);
  MeshScene scene;
  scene.add(c.instance, world);
  const Aabb box = world.bounds();

  std::vector<ObsTermSums> per_view(obs.size());
  parallel_for(obs.size(), [&](std::size_t k) {
    const Observation& o = obs[k];
    const auto rect = footprint(o, box, c.instance);
    if (!rect) return;
    Observation r = render_meshes(scene, o.camera, rect);
    // Whatever was observed in front of the candidate hides it.
    for (std::size_t p = 0; p < r.pixels(); ++p) {
      if (o.mask[p] == c.instance || o.depth[p] <= 0) continue;
      if (r.depth[p] <= 0 || o.depth[p] < r.depth[p]) {
        r.mask[p] = o.mask[p];
        r.depth[p] = o.depth[p];
        if (!r.normal.empty() && !o.normal.empty()) r.normal[p] = o.normal[p];
      }
    }
    const auto normals = o.normal.empty() ? estimate_normals(o) : o.normal;
    per_view[k] = compare_images(o, normals, r, c.instance);
  });
  ObsTermSums sums;
  for (const auto& t : per_view) sums.add(t);

  CandidateScore s;
  s.mask = sums.mask_mean();
  s.depth = sums.depth_pixels > 0 ? sums.depth_mean() : 0.0;
  s.normal = sums.normal_mean();

  std::size_t hits = 0, carved_hits = 0;
  const SdfGrid& g = fused.sdf;
  const auto& d = g.dims();
  auto all_carved = [&](const Vec3& p) {
    const Vec3 q = (p - g.origin()) / g.spacing();
    const int x = int(std::floor(q.x())), y = int(std::floor(q.y())), z = int(std::floor(q.z()));
    if (x < 0 || y < 0 || z < 0 || x + 1 >= d[0] || y + 1 >= d[1] || z + 1 >= d[2]) return false;
    for (int cz = 0; cz < 2; ++cz)
      for (int cy = 0; cy < 2; ++cy)
        for (int cx = 0; cx < 2; ++cx) {
          const std::size_t i = g.index(x + cx, y + cy, z + cz);
          if (!fused.carved[i] || g.weight(i) > 0) return false;
        }
    return true;
  };
  for (const auto& cam : virtual_views) {
    const Observation r = render_meshes(scene, cam);
    for (int v = 0; v < cam.height; ++v)
      for (int u = 0; u < cam.width; ++u) {
        if (r.depth[r.pixel(u, v)] <= 0) continue;
        ++hits;
        carved_hits += all_carved(r.back_project(u, v));
      }
  }
  s.silhouette = hits > 0 ? double(carved_hits) / double(hits) : 0.0;
  s.weighted = cfg.lambda_mask * (s.mask + s.silhouette) + cfg.lambda_depth * s.depth + cfg.lambda_normal * s.normal;
  c.score = s;
  return c;
}

void dump_candidates(const std::vector<Candidate>& cs, const std::filesystem::path& dir) {
  std::map<int, int> counter;
  for (const auto& c : cs) {
    const int k = counter[c.instance]++;
    const auto base = dir / "candidates" / std::to_string(c.instance);
    std::filesystem::create_directories(base);
    write_obj(c.mesh, base / (std::to_string(k) + ".obj"));
    write_sdfgrid(c.sdf, base / (std::to_string(k) + ".sdfgrid"));
    nlohmann::ordered_json j;
    j["instance"] = c.instance;
    j["provenance"] = to_string(c.provenance);
    j["seed"] = c.seed;
    const Vec3 t = c.pose.translation;
    j["translation"] = {t.x(), t.y(), t.z()};
    j["observed_deviation"] = c.observed_deviation;
    if (c.score)
      j["score"] = {{"mask", c.score->mask},         {"depth", c.score->depth},
                    {"normal", c.score->normal},     {"silhouette", c.score->silhouette},
                    {"weighted", c.score->weighted}};
    std::ofstream out(base / (std::to_string(k) + ".json"));
    if (!out) fail(ErrorCode::io, "cannot write candidate json in " + base.string());
    out << j.dump(2) << "\n";
  }
}

}  // namespace sceneforge
