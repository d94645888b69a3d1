#include "sceneforge/geom/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sceneforge/util/error.hpp"

namespace sceneforge {

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string obj_string(const TriMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 48 + mesh.faces.size() * 24);
  for (const auto& v : mesh.vertices) {
    out += "v " + format_double(v.x()) + ' ' + format_double(v.y()) + ' ' +
           format_double(v.z()) + '\n';
  }
  const bool normals = mesh.normals.size() == mesh.vertices.size() && !mesh.normals.empty();
  if (normals) {
    for (const auto& n : mesh.normals) {
      out += "vn " + format_double(n.x()) + ' ' + format_double(n.y()) + ' ' +
             format_double(n.z()) + '\n';
    }
  }
  for (const auto& f : mesh.faces) {
    out += 'f';
    for (auto i : f) {
      const auto s = std::to_string(i + 1);
      out += ' ' + s;
      if (normals) out += "//" + s;
    }
    out += '\n';
  }
  return out;
}

void write_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot write " + path.string());
  f << obj_string(mesh);
}

TriMesh read_obj(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::missing_asset, "missing mesh file " + path.string());
  TriMesh mesh;
  std::vector<Vec3> normals;
  std::vector<long> normal_of_vertex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z()))
        fail(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) + ": bad vertex");
      mesh.vertices.push_back(p);
    } else if (tag == "vn") {
      Vec3 n;
      if (!(ss >> n.x() >> n.y() >> n.z()))
        fail(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) + ": bad normal");
      normals.push_back(n);
    } else if (tag == "f") {
      std::vector<std::uint32_t> idx;
      std::string tok;
      while (ss >> tok) {
        const long v = std::stol(tok.substr(0, tok.find('/')));
        const long vi = v < 0 ? static_cast<long>(mesh.vertices.size()) + v : v - 1;
        if (vi < 0 || vi >= static_cast<long>(mesh.vertices.size()))
          fail(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) +
                                     ": face index out of range");
        idx.push_back(static_cast<std::uint32_t>(vi));
        const auto last = tok.rfind('/');
        if (last != std::string::npos && last + 1 < tok.size()) {
          if (normal_of_vertex.size() < mesh.vertices.size())
            normal_of_vertex.resize(mesh.vertices.size(), -1);
          normal_of_vertex[vi] = std::stol(tok.substr(last + 1)) - 1;
        }
      }
      if (idx.size() < 3)
        fail(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) + ": short face");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  if (!normals.empty()) {
    normal_of_vertex.resize(mesh.vertices.size(), -1);
    mesh.normals.resize(mesh.vertices.size(), Vec3::UnitZ());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      const long n = normal_of_vertex[v] >= 0 ? normal_of_vertex[v] : static_cast<long>(v);
      if (n >= 0 && n < static_cast<long>(normals.size())) mesh.normals[v] = normals[n];
    }
  }
  return mesh;
}

namespace {

constexpr char kMagic[16] = {'S', 'D', 'F', 'G', 'R', 'I', 'D', '1',
                             0,   0,   0,   0,   0,   0,   0,   0};

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}
void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  put_u32(out, static_cast<std::uint32_t>(bits));
  put_u32(out, static_cast<std::uint32_t>(bits >> 32));
}

struct Reader {
  const std::string& data;
  std::size_t pos = 0;
  const std::string& name;

  void need(std::size_t n) {
    if (pos + n > data.size()) fail(ErrorCode::parse, name + ": truncated sdfgrid");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + b])) << (8 * b);
    pos += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() {
    const std::uint64_t lo = u32();
    const std::uint64_t hi = u32();
    return std::bit_cast<double>(lo | (hi << 32));
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data[pos++]);
  }
};

}  // namespace

void write_sdfgrid(const SdfGrid& grid, const std::filesystem::path& path) {
  std::string out(kMagic, kMagic + 16);
  const auto& d = grid.dims();
  for (int a = 0; a < 3; ++a) put_u32(out, static_cast<std::uint32_t>(d[a]));
  for (int a = 0; a < 3; ++a) put_f64(out, grid.origin()[a]);
  put_f64(out, grid.spacing());
  put_f64(out, grid.truncation());
  for (float v : grid.values()) put_f32(out, v);
  out.push_back(grid.has_weights() ? 1 : 0);
  for (float w : grid.weights()) put_f32(out, w);
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

SdfGrid read_sdfgrid(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::missing_asset, "missing sdf file " + path.string());
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (data.size() < 16 || std::memcmp(data.data(), kMagic, 8) != 0)
    fail(ErrorCode::parse, name + ": bad sdfgrid magic");
  Reader r{data, 16, name};
  GridSpec spec;
  for (int a = 0; a < 3; ++a) spec.dims[a] = static_cast<int>(r.u32());
  for (int a = 0; a < 3; ++a) spec.origin[a] = r.f64();
  spec.spacing = r.f64();
  spec.truncation = r.f64();
  if (!spec.valid()) fail(ErrorCode::parse, name + ": invalid grid header");
  SdfGrid grid(spec);
  for (auto& v : grid.values_mut()) v = r.f32();
  if (r.u8()) {
    grid.enable_weights();
    for (auto& w : grid.weights_mut()) w = r.f32();
  }
  return grid;
}

}  // namespace sceneforge
