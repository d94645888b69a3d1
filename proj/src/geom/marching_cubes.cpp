#include "sceneforge/geom/marching_cubes.hpp"

#include <cstdint>
#include <vector>

namespace sceneforge {

namespace {

#include "mc_tables.inc"

constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

}  // namespace

TriMesh marching_cubes(const SdfGrid& grid, double iso) {
  TriMesh mesh;
  const auto& d = grid.dims();
  const std::size_t n = grid.size();
  std::vector<std::int32_t> edge_vertex(3 * n, -1);

  auto vertex_on_edge = [&](int i, int j, int k, int e) -> std::uint32_t {
    int a[3], b[3];
    for (int c = 0; c < 3; ++c) {
      a[c] = (c == 0 ? i : c == 1 ? j : k) + kCorner[kEdge[e][0]][c];
      b[c] = (c == 0 ? i : c == 1 ? j : k) + kCorner[kEdge[e][1]][c];
    }
    int axis = 0;
    while (a[axis] == b[axis]) ++axis;
    if (a[axis] > b[axis]) std::swap(a, b);
    const std::size_t lo = grid.index(a[0], a[1], a[2]);
    const std::size_t hi = grid.index(b[0], b[1], b[2]);
    auto& slot = edge_vertex[3 * lo + axis];
    if (slot < 0) {
      const double va = grid.at(lo), vb = grid.at(hi);
      const double t = (va == vb) ? 0.5 : (iso - va) / (vb - va);
      const Vec3 pa = grid.point(a[0], a[1], a[2]);
      const Vec3 pb = grid.point(b[0], b[1], b[2]);
      slot = static_cast<std::int32_t>(mesh.vertices.size());
      mesh.vertices.push_back(pa + t * (pb - pa));
    }
    return static_cast<std::uint32_t>(slot);
  };

  for (int k = 0; k + 1 < d[2]; ++k) {
    for (int j = 0; j + 1 < d[1]; ++j) {
      for (int i = 0; i + 1 < d[0]; ++i) {
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          if (grid.at(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]) < iso)
            cube |= 1 << c;
        }
        if (cube == 0 || cube == 255) continue;
        const int* row = kTriTable[cube];
        for (int t = 0; row[t] != -1; t += 3) {
          const auto v0 = vertex_on_edge(i, j, k, row[t]);
          const auto v1 = vertex_on_edge(i, j, k, row[t + 1]);
          const auto v2 = vertex_on_edge(i, j, k, row[t + 2]);
          // The table winds clockwise seen from the inside-corner side;
          // reversing gives normals that point toward larger values.
          mesh.faces.push_back({v0, v2, v1});
        }
      }
    }
  }

  mesh.compute_normals();
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Vec3 g = grid.gradient(mesh.vertices[v]).value;
    const double len = g.norm();
    if (len > 1e-12) mesh.normals[v] = g / len;
  }
  return mesh;
}

}  // namespace sceneforge
