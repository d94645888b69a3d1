#include "sceneforge/geom/bvh.hpp"

#include <algorithm>
#include <cmath>

namespace sceneforge {

namespace {

constexpr std::uint32_t kLeafSize = 4;

using Tri = std::array<Vec3, 3>;

Aabb tri_box(const Tri& t) {
  Aabb b;
  for (const auto& p : t) b.extend(p);
  return b;
}

// Interval covered on the line by a triangle whose vertices have signed
// plane distances d and line projections p.
std::pair<double, double> line_interval(const double d[3], const double p[3]) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto add = [&](double t) {
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  };
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) add(p[i]);
    const int j = (i + 1) % 3;
    if ((d[i] < 0 && d[j] > 0) || (d[i] > 0 && d[j] < 0))
      add(p[i] + (p[j] - p[i]) * d[i] / (d[i] - d[j]));
  }
  return {lo, hi};
}

double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                const Eigen::Vector2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool segments_intersect_2d(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                           const Eigen::Vector2d& q1, const Eigen::Vector2d& q2) {
  const double d1 = orient2d(q1, q2, p1), d2 = orient2d(q1, q2, p2);
  const double d3 = orient2d(p1, p2, q1), d4 = orient2d(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on_segment = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const Eigen::Vector2d& c) {
    return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

bool point_in_triangle_2d(const Eigen::Vector2d& p, const Eigen::Vector2d t[3]) {
  const double a = orient2d(t[0], t[1], p);
  const double b = orient2d(t[1], t[2], p);
  const double c = orient2d(t[2], t[0], p);
  return (a >= 0 && b >= 0 && c >= 0) || (a <= 0 && b <= 0 && c <= 0);
}

bool coplanar_intersect(const Tri& a, const Tri& b, const Vec3& n) {
  int drop = 0;
  n.cwiseAbs().maxCoeff(&drop);
  const int u = (drop + 1) % 3, v = (drop + 2) % 3;
  Eigen::Vector2d pa[3], pb[3];
  for (int i = 0; i < 3; ++i) {
    pa[i] = {a[i][u], a[i][v]};
    pb[i] = {b[i][u], b[i][v]};
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (segments_intersect_2d(pa[i], pa[(i + 1) % 3], pb[j], pb[(j + 1) % 3]))
        return true;
  return point_in_triangle_2d(pa[0], pb) || point_in_triangle_2d(pb[0], pa);
}

void plane_distances(const Tri& plane_tri, const Tri& other, Vec3& normal,
                     double out[3]) {
  normal = (plane_tri[1] - plane_tri[0]).cross(plane_tri[2] - plane_tri[0]);
  const double len = normal.norm();
  if (len > 0) normal /= len;
  double scale = 0;
  for (int i = 0; i < 3; ++i) {
    out[i] = normal.dot(other[i] - plane_tri[0]);
    scale = std::max(scale, (other[i] - plane_tri[0]).cwiseAbs().maxCoeff());
  }
  const double eps = 1e-12 * std::max(scale, 1e-3);
  for (int i = 0; i < 3; ++i)
    if (std::abs(out[i]) < eps) out[i] = 0.0;
}

bool same_strict_sign(const double d[3]) {
  return (d[0] > 0 && d[1] > 0 && d[2] > 0) || (d[0] < 0 && d[1] < 0 && d[2] < 0);
}

}  // namespace

bool triangles_intersect(const Tri& a, const Tri& b) {
  Vec3 nb, na;
  double da[3], db[3];
  plane_distances(b, a, nb, da);
  if (same_strict_sign(da)) return false;
  plane_distances(a, b, na, db);
  if (same_strict_sign(db)) return false;
  if (da[0] == 0 && da[1] == 0 && da[2] == 0) return coplanar_intersect(a, b, nb);
  if (db[0] == 0 && db[1] == 0 && db[2] == 0) return coplanar_intersect(a, b, na);

  const Vec3 dir = na.cross(nb);
  if (dir.squaredNorm() == 0.0) return coplanar_intersect(a, b, na);
  int axis = 0;
  dir.cwiseAbs().maxCoeff(&axis);
  double pa[3], pb[3];
  for (int i = 0; i < 3; ++i) {
    pa[i] = a[i][axis];
    pb[i] = b[i][axis];
  }
  const auto ia = line_interval(da, pa);
  const auto ib = line_interval(db, pb);
  return ia.first <= ib.second && ib.first <= ia.second;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

MeshBvh::MeshBvh(const TriMesh& mesh) {
  if (mesh.faces.empty()) return;
  tris_.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces)
    tris_.push_back({mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]});
  tri_boxes_.reserve(tris_.size());
  for (const auto& t : tris_) tri_boxes_.push_back(tri_box(t));
  order_.resize(tris_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.reserve(2 * tris_.size() / kLeafSize + 2);
  build(0, static_cast<std::uint32_t>(tris_.size()));
}

std::uint32_t MeshBvh::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({});
  Aabb box, centroids;
  for (auto i = begin; i < end; ++i) {
    box.extend(tri_boxes_[order_[i]]);
    centroids.extend(tri_boxes_[order_[i]].center());
  }
  nodes_[id].box = box;
  if (end - begin <= kLeafSize) {
    nodes_[id].first = begin;
    nodes_[id].count = end - begin;
    return id;
  }
  int axis = 0;
  centroids.extent().maxCoeff(&axis);
  const auto mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t x, std::uint32_t y) {
                     const double cx = tri_boxes_[x].center()[axis];
                     const double cy = tri_boxes_[y].center()[axis];
                     return cx < cy || (cx == cy && x < y);
                   });
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[id].first = left;
  nodes_[id].right = right;
  nodes_[id].count = 0;
  return id;
}

namespace {

bool ray_box(const Aabb& b, const Vec3& o, const Vec3& inv, double t0, double t1) {
  for (int a = 0; a < 3; ++a) {
    double tn = (b.min[a] - o[a]) * inv[a];
    double tf = (b.max[a] - o[a]) * inv[a];
    if (tn > tf) std::swap(tn, tf);
    if (std::isnan(tn) || std::isnan(tf)) {
      if (o[a] < b.min[a] || o[a] > b.max[a]) return false;
      continue;
    }
    t0 = std::max(t0, tn);
    t1 = std::min(t1, tf);
    if (t0 > t1) return false;
  }
  return true;
}

bool ray_triangle(const Vec3& o, const Vec3& d, const Tri& t, double& tt,
                  double& u, double& v) {
  const Vec3 e1 = t[1] - t[0], e2 = t[2] - t[0];
  const Vec3 pv = d.cross(e2);
  const double det = e1.dot(pv);
  if (det == 0.0) return false;
  const double inv = 1.0 / det;
  const Vec3 s = o - t[0];
  u = s.dot(pv) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 q = s.cross(e1);
  v = d.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  tt = e2.dot(q) * inv;
  return true;
}

}  // namespace

std::optional<RayHit> MeshBvh::raycast(const Vec3& origin, const Vec3& dir,
                                       double t_min, double t_max) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv = dir.cwiseInverse();
  std::optional<RayHit> best;
  double limit = t_max;
  std::uint32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    if (!ray_box(n.box, origin, inv, t_min, limit)) continue;
    if (n.count > 0) {
      for (auto i = n.first; i < n.first + n.count; ++i) {
        const auto f = order_[i];
        double t, u, v;
        if (ray_triangle(origin, dir, tris_[f], t, u, v) && t > t_min &&
            (t < limit || (t == limit && best && f < best->face))) {
          limit = t;
          best = RayHit{t, f, u, v};
        }
      }
    } else {
      stack[top++] = n.first;
      stack[top++] = n.right;
    }
  }
  return best;
}

std::optional<ClosestPoint> MeshBvh::closest(const Vec3& p,
                                             double max_distance) const {
  if (nodes_.empty()) return std::nullopt;
  std::optional<ClosestPoint> best;
  double best_d2 = max_distance * max_distance;
  std::uint32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    if (n.box.distance2(p) > best_d2) continue;
    if (n.count > 0) {
      for (auto i = n.first; i < n.first + n.count; ++i) {
        const auto f = order_[i];
        const Vec3 c = closest_point_on_triangle(p, tris_[f][0], tris_[f][1], tris_[f][2]);
        const double d2 = (c - p).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && best && f < best->face)) {
          best_d2 = d2;
          best = ClosestPoint{c, d2, f};
        }
      }
    } else {
      const Node& l = nodes_[n.first];
      const Node& r = nodes_[n.right];
      // Visit the nearer child first (pushed last).
      if (l.box.distance2(p) < r.box.distance2(p)) {
        stack[top++] = n.right;
        stack[top++] = n.first;
      } else {
        stack[top++] = n.first;
        stack[top++] = n.right;
      }
    }
  }
  return best;
}

template <class Visit>
bool MeshBvh::pair_traverse(const MeshBvh& other, Visit&& visit) const {
  if (nodes_.empty() || other.nodes_.empty()) return false;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{0u, 0u}};
  while (!stack.empty()) {
    const auto [ia, ib] = stack.back();
    stack.pop_back();
    const Node& a = nodes_[ia];
    const Node& b = other.nodes_[ib];
    if (!a.box.overlaps(b.box)) continue;
    if (a.count > 0 && b.count > 0) {
      for (auto i = a.first; i < a.first + a.count; ++i) {
        const auto fa = order_[i];
        for (auto j = b.first; j < b.first + b.count; ++j) {
          const auto fb = other.order_[j];
          if (!tri_boxes_[fa].overlaps(other.tri_boxes_[fb])) continue;
          if (triangles_intersect(tris_[fa], other.tris_[fb]) && visit(fa, fb))
            return true;
        }
      }
    } else if (b.count > 0 ||
               (a.count == 0 && a.box.extent().squaredNorm() >=
                                    b.box.extent().squaredNorm())) {
      stack.push_back({a.first, ib});
      stack.push_back({a.right, ib});
    } else {
      stack.push_back({ia, b.first});
      stack.push_back({ia, b.right});
    }
  }
  return false;
}

bool MeshBvh::intersects(const MeshBvh& other) const {
  return pair_traverse(other, [](std::uint32_t, std::uint32_t) { return true; });
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> MeshBvh::intersecting_pairs(
    const MeshBvh& other) const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  pair_traverse(other, [&](std::uint32_t a, std::uint32_t b) {
    out.push_back({a, b});
    return false;
  });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sceneforge
