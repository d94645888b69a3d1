#include "sceneforge/geom/trimesh.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace sceneforge {

Aabb TriMesh::bounds() const {
  Aabb b;
  for (const auto& v : vertices) b.extend(v);
  return b;
}

Vec3 TriMesh::face_normal(std::size_t f) const {
  const auto& t = faces[f];
  Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
  const double len = n.norm();
  return len > 0 ? Vec3(n / len) : Vec3::Zero();
}

double TriMesh::face_area(std::size_t f) const {
  const auto& t = faces[f];
  return 0.5 *
         (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

double TriMesh::area() const {
  double a = 0;
  for (std::size_t f = 0; f < faces.size(); ++f) a += face_area(f);
  return a;
}

double TriMesh::volume() const {
  double v = 0;
  for (const auto& t : faces)
    v += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]]));
  return v / 6.0;
}

std::size_t TriMesh::boundary_edges() const {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> count;
  for (const auto& t : faces) {
    for (int e = 0; e < 3; ++e) {
      auto a = t[e], b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++count[{a, b}];
    }
  }
  std::size_t open = 0;
  for (const auto& [_, c] : count)
    if (c != 2) ++open;
  return open;
}

bool TriMesh::well_formed() const {
  const auto n = vertices.size();
  for (const auto& t : faces) {
    if (t[0] >= n || t[1] >= n || t[2] >= n) return false;
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) return false;
  }
  return normals.empty() || normals.size() == n;
}

void TriMesh::compute_normals() {
  normals.assign(vertices.size(), Vec3::Zero());
  for (const auto& t : faces) {
    const Vec3 n =
        (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
    for (auto i : t) normals[i] += n;
  }
  for (auto& n : normals) {
    const double len = n.norm();
    n = len > 0 ? Vec3(n / len) : Vec3::UnitZ();
  }
}

TriMesh transform_mesh(const TriMesh& m, const RigidTransform& t) {
  TriMesh out;
  out.faces = m.faces;
  out.vertices.reserve(m.vertices.size());
  for (const auto& v : m.vertices) out.vertices.push_back(t.apply(v));
  out.normals.reserve(m.normals.size());
  for (const auto& n : m.normals) out.normals.push_back(t.rotate(n));
  return out;
}

TriMesh merge_meshes(const std::vector<const TriMesh*>& parts) {
  TriMesh out;
  bool normals = true;
  for (const auto* p : parts) normals = normals && p->normals.size() == p->vertices.size();
  for (const auto* p : parts) {
    const auto base = static_cast<std::uint32_t>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), p->vertices.begin(), p->vertices.end());
    if (normals)
      out.normals.insert(out.normals.end(), p->normals.begin(), p->normals.end());
    for (const auto& f : p->faces) out.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
  }
  return out;
}

TriMesh make_box_mesh(const Vec3& half, int n) {
  n = std::max(1, n);
  TriMesh m;
  std::map<std::array<int, 3>, std::uint32_t> index;
  auto vertex = [&](std::array<int, 3> c) {
    auto it = index.find(c);
    if (it != index.end()) return it->second;
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = half[a] * (2.0 * c[a] / n - 1.0);
    const auto id = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.push_back(p);
    index.emplace(c, id);
    return id;
  };
  // For each axis and side, walk the face lattice in (u, v) so that
  // u x v points along the outward normal.
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      int u = (axis + 1) % 3, v = (axis + 2) % 3;
      if (side == 0) std::swap(u, v);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          auto corner = [&](int da, int db) {
            std::array<int, 3> c{};
            c[axis] = side * n;
            c[u] = a + da;
            c[v] = b + db;
            return vertex(c);
          };
          const auto c00 = corner(0, 0), c10 = corner(1, 0), c11 = corner(1, 1),
                     c01 = corner(0, 1);
          m.faces.push_back({c00, c10, c11});
          m.faces.push_back({c00, c11, c01});
        }
      }
    }
  }
  m.compute_normals();
  return m;
}

}  // namespace sceneforge
