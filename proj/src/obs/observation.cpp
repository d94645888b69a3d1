#include "sceneforge/obs/observation.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sceneforge/geom/trimesh.hpp"
#include "sceneforge/util/error.hpp"
#include "sceneforge/util/parallel.hpp"

namespace sceneforge {

namespace {

constexpr int kMaxSteps = 200;
constexpr double kHitTolerance = 1e-4;

struct PosedShape {
  int id;
  const AnalyticSdf* shape;
  RigidTransform object_from_world;
  Aabb world_box;  // empty for unbounded shapes
};

}  // namespace

Observation render_observation(const std::vector<GtObject>& gt, const Camera& cam) {
  require(!gt.empty(), "render_observation: empty scene");
  require(cam.valid(), "render_observation: invalid camera");
  std::vector<PosedShape> shapes;
  Aabb scene_box;
  bool unbounded = false;
  for (const auto& o : gt) {
    PosedShape s{o.id, &o.shape, o.pose.inverse(), {}};
    const Aabb b = o.shape.bounds();
    if (b.empty()) {
      unbounded = true;
    } else {
      for (int c = 0; c < 8; ++c)
        s.world_box.extend(o.pose.apply(Vec3(c & 1 ? b.max.x() : b.min.x(),
                                             c & 2 ? b.max.y() : b.min.y(),
                                             c & 4 ? b.max.z() : b.min.z())));
      scene_box.extend(s.world_box);
    }
    shapes.push_back(s);
  }
  // Rays stop once they are past every bounded shape.
  const double far = unbounded ? 1e3
                               : std::sqrt(scene_box.distance2(cam.center())) +
                                     scene_box.extent().norm() + 1.0;

  Observation obs;
  obs.camera = cam;
  obs.depth.assign(obs.pixels(), 0.0f);
  obs.mask.assign(obs.pixels(), kEmptyLabel);
  obs.normal.assign(obs.pixels(), Vec3f::Zero());
  auto eval = [&](const Vec3& p, std::size_t& arg) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      const double d = shapes[k].shape->distance(shapes[k].object_from_world.apply(p));
      if (d < best) best = d, arg = k;
    }
    return best;
  };
  parallel_for(static_cast<std::size_t>(cam.height), [&](std::size_t row) {
    const int v = static_cast<int>(row);
    for (int u = 0; u < cam.width; ++u) {
      const Vec3 o = cam.center();
      const Vec3 d = cam.ray(u, v);
      double t = 0.0;
      for (int step = 0; step < kMaxSteps && t < far; ++step) {
        std::size_t arg = 0;
        const Vec3 p = o + t * d;
        const double dist = eval(p, arg);
        if (dist < kHitTolerance) {
          const auto& s = shapes[arg];
          const RigidTransform world_from_object = s.object_from_world.inverse();
          auto f = [&](double tt) { return s.shape->distance(s.object_from_world.apply(o + tt * d)); };
          auto normal = [&](double tt) {
            return world_from_object.rotate(s.shape->normal(s.object_from_world.apply(o + tt * d)));
          };
          // Newton steps along the ray remove the 1/cos amplification of the
          // tolerance at grazing incidence. A ray that only skims an edge
          // never reaches the surface and keeps marching.
          double th = t;
          double fh = dist;
          for (int it = 0; it < 8 && std::abs(fh) > 1e-7; ++it) {
            th += fh / std::max(std::abs(normal(th).dot(d)), 0.05);
            fh = f(th);
          }
          if (std::abs(fh) > 1e-6) {
            t += 2 * kHitTolerance;
            continue;
          }
          const std::size_t px = obs.pixel(u, v);
          obs.depth[px] = static_cast<float>(th);
          obs.mask[px] = static_cast<std::uint16_t>(s.id);
          obs.normal[px] = normal(th).normalized().cast<float>();
          break;
        }
        t += dist;
      }
    }
  });
  return obs;
}

void MeshScene::add(int id, const TriMesh& world_mesh) {
  if (world_mesh.empty()) return;
  ids.push_back(id);
  bvhs.emplace_back(world_mesh);
}

Observation render_meshes(const MeshScene& scene, const Camera& cam,
                          const std::optional<PixelRect>& rect) {
  Observation obs;
  obs.camera = cam;
  obs.depth.assign(obs.pixels(), 0.0f);
  obs.mask.assign(obs.pixels(), kEmptyLabel);
  obs.normal.assign(obs.pixels(), Vec3f::Zero());
  PixelRect r = rect.value_or(PixelRect{0, 0, cam.width, cam.height});
  r.u0 = std::max(r.u0, 0);
  r.v0 = std::max(r.v0, 0);
  r.u1 = std::min(r.u1, cam.width);
  r.v1 = std::min(r.v1, cam.height);
  if (r.u0 >= r.u1 || r.v0 >= r.v1 || scene.bvhs.empty()) return obs;
  parallel_for(static_cast<std::size_t>(r.v1 - r.v0), [&](std::size_t row) {
    const int v = r.v0 + static_cast<int>(row);
    for (int u = r.u0; u < r.u1; ++u) {
      const Vec3 o = cam.center();
      const Vec3 d = cam.ray(u, v);
      double best = 1e30;
      std::size_t arg = 0;
      std::optional<RayHit> hit;
      for (std::size_t k = 0; k < scene.bvhs.size(); ++k) {
        if (auto h = scene.bvhs[k].raycast(o, d, 0.0, best)) {
          best = h->t;
          hit = h;
          arg = k;
        }
      }
      if (!hit) continue;
      const std::size_t px = obs.pixel(u, v);
      obs.depth[px] = static_cast<float>(hit->t);
      obs.mask[px] = static_cast<std::uint16_t>(scene.ids[arg]);
      const auto& tri = scene.bvhs[arg].triangle(hit->face);
      Vec3 n = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
      if (n.norm() > 0) n.normalize();
      obs.normal[px] = n.cast<float>();
    }
  });
  return obs;
}

std::vector<Vec3f> estimate_normals(const Observation& obs) {
  const int w = obs.camera.width, h = obs.camera.height;
  std::vector<Vec3f> out(obs.pixels(), Vec3f::Zero());
  auto valid = [&](int u, int v) {
    return u >= 0 && v >= 0 && u < w && v < h && obs.depth[obs.pixel(u, v)] > 0;
  };
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      if (!valid(u, v)) continue;
      const Vec3 p = obs.back_project(u, v);
      // Prefer forward differences; fall back to backward ones at edges.
      const int du = valid(u + 1, v) ? 1 : (valid(u - 1, v) ? -1 : 0);
      const int dv = valid(u, v + 1) ? 1 : (valid(u, v - 1) ? -1 : 0);
      if (du == 0 || dv == 0) continue;
      const Vec3 a = (obs.back_project(u + du, v) - p) * du;
      const Vec3 b = (obs.back_project(u, v + dv) - p) * dv;
      Vec3 n = a.cross(b);
      if (n.norm() == 0) continue;
      n.normalize();
      if (n.dot(obs.camera.ray(u, v)) > 0) n = -n;
      out[obs.pixel(u, v)] = n.cast<float>();
    }
  return out;
}

void write_pfm(const std::filesystem::path& path, int width, int height, int channels,
               const std::vector<float>& data) {
  require(channels == 1 || channels == 3, "write_pfm: channels must be 1 or 3");
  require(data.size() == static_cast<std::size_t>(width) * height * channels,
          "write_pfm: size mismatch");
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot write " + path.string());
  f << (channels == 3 ? "PF" : "Pf") << "\n" << width << " " << height << "\n-1.0\n";
  const std::size_t row = static_cast<std::size_t>(width) * channels;
  std::string buf(row * 4, '\0');
  for (int y = height - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row; ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(data[y * row + i]);
      for (int b = 0; b < 4; ++b) buf[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::missing_asset, "missing file " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Reads whitespace-separated header tokens, then one whitespace byte.
struct HeaderReader {
  const std::string& data;
  std::size_t pos = 0;

  std::string token() {
    while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return data.substr(start, pos - start);
  }
};

}  // namespace

std::vector<float> read_pfm(const std::filesystem::path& path, int& width, int& height,
                            int& channels) {
  const std::string data = read_file(path);
  HeaderReader r{data};
  const std::string magic = r.token();
  if (magic != "Pf" && magic != "PF") fail(ErrorCode::parse, path.string() + ": not a PFM");
  channels = magic == "PF" ? 3 : 1;
  try {
    width = std::stoi(r.token());
    height = std::stoi(r.token());
    const double scale = std::stod(r.token());
    if (scale >= 0) fail(ErrorCode::parse, path.string() + ": big-endian PFM unsupported");
  } catch (const std::logic_error&) {
    fail(ErrorCode::parse, path.string() + ": bad PFM header");
  }
  ++r.pos;
  const std::size_t row = static_cast<std::size_t>(width) * channels;
  if (width <= 0 || height <= 0 || data.size() < r.pos + row * height * 4)
    fail(ErrorCode::parse, path.string() + ": truncated PFM");
  std::vector<float> out(row * height);
  const auto* p = reinterpret_cast<const unsigned char*>(data.data() + r.pos);
  for (int y = height - 1; y >= 0; --y)
    for (std::size_t i = 0; i < row; ++i, p += 4) {
      const std::uint32_t bits = p[0] | (p[1] << 8) | (p[2] << 16) |
                                 (static_cast<std::uint32_t>(p[3]) << 24);
      out[y * row + i] = std::bit_cast<float>(bits);
    }
  return out;
}

void write_pgm16(const std::filesystem::path& path, int width, int height,
                 const std::vector<std::uint16_t>& data) {
  require(data.size() == static_cast<std::size_t>(width) * height, "write_pgm16: size mismatch");
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot write " + path.string());
  f << "P5\n" << width << " " << height << "\n65535\n";
  std::string buf(data.size() * 2, '\0');
  for (std::size_t i = 0; i < data.size(); ++i) {
    buf[2 * i] = static_cast<char>(data[i] >> 8);
    buf[2 * i + 1] = static_cast<char>(data[i] & 0xff);
  }
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<std::uint16_t> read_pgm16(const std::filesystem::path& path, int& width,
                                      int& height) {
  const std::string data = read_file(path);
  HeaderReader r{data};
  if (r.token() != "P5") fail(ErrorCode::parse, path.string() + ": not a binary PGM");
  int maxval = 0;
  try {
    width = std::stoi(r.token());
    height = std::stoi(r.token());
    maxval = std::stoi(r.token());
  } catch (const std::logic_error&) {
    fail(ErrorCode::parse, path.string() + ": bad PGM header");
  }
  if (maxval != 65535) fail(ErrorCode::parse, path.string() + ": expected 16-bit PGM");
  ++r.pos;
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (width <= 0 || height <= 0 || data.size() < r.pos + 2 * n)
    fail(ErrorCode::parse, path.string() + ": truncated PGM");
  std::vector<std::uint16_t> out(n);
  const auto* p = reinterpret_cast<const unsigned char*>(data.data() + r.pos);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
  return out;
}

namespace {

std::string frame_name(std::size_t i, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "frame_%03zu.%s", i, suffix);
  return buf;
}

}  // namespace

void save_observations(const std::vector<Observation>& obs, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto& o = obs[i];
    const int w = o.camera.width, h = o.camera.height;
    write_pfm(dir / frame_name(i, "depth.pfm"), w, h, 1, o.depth);
    write_pgm16(dir / frame_name(i, "mask.pgm"), w, h, o.mask);
    std::ofstream f(dir / frame_name(i, "camera.json"), std::ios::binary);
    if (!f) fail(ErrorCode::io, "cannot write camera file in " + dir.string());
    f << camera_json(o.camera);
    if (!o.normal.empty()) {
      std::vector<float> flat;
      flat.reserve(o.normal.size() * 3);
      for (const auto& n : o.normal) flat.insert(flat.end(), {n.x(), n.y(), n.z()});
      write_pfm(dir / frame_name(i, "normal.pfm"), w, h, 3, flat);
    }
  }
}

std::vector<Observation> load_observations(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    fail(ErrorCode::missing_asset, "missing observation directory " + dir.string());
  std::vector<Observation> out;
  for (std::size_t i = 0;; ++i) {
    const auto cam_path = dir / frame_name(i, "camera.json");
    if (!std::filesystem::exists(cam_path)) break;
    Observation o;
    o.camera = camera_from_json(read_file(cam_path), cam_path.string());
    int w = 0, h = 0, c = 0;
    o.depth = read_pfm(dir / frame_name(i, "depth.pfm"), w, h, c);
    if (w != o.camera.width || h != o.camera.height || c != 1)
      fail(ErrorCode::parse, "frame " + std::to_string(i) + ": depth size mismatch");
    o.mask = read_pgm16(dir / frame_name(i, "mask.pgm"), w, h);
    if (w != o.camera.width || h != o.camera.height)
      fail(ErrorCode::parse, "frame " + std::to_string(i) + ": mask size mismatch");
    const auto npath = dir / frame_name(i, "normal.pfm");
    if (std::filesystem::exists(npath)) {
      const auto flat = read_pfm(npath, w, h, c);
      if (w != o.camera.width || h != o.camera.height || c != 3)
        fail(ErrorCode::parse, "frame " + std::to_string(i) + ": normal size mismatch");
      o.normal.resize(o.pixels());
      for (std::size_t k = 0; k < o.normal.size(); ++k)
        o.normal[k] = Vec3f(flat[3 * k], flat[3 * k + 1], flat[3 * k + 2]);
    }
    out.push_back(std::move(o));
  }
  if (out.empty()) fail(ErrorCode::missing_asset, "no frames in " + dir.string());
  return out;
}

}  // namespace sceneforge
