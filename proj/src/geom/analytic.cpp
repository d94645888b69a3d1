#include "sceneforge/geom/analytic.hpp"

#include <cmath>

#include "sceneforge/util/error.hpp"

namespace sceneforge {

double box_distance(const Vec3& p, const Vec3& half) {
  const Vec3 q = p.cwiseAbs() - half;
  return q.cwiseMax(Vec3::Zero()).norm() + std::min(q.maxCoeff(), 0.0);
}

namespace {

double cylinder_distance(const Vec3& p, double r, double half_h) {
  const double dx = std::hypot(p.x(), p.y()) - r;
  const double dz = std::abs(p.z()) - half_h;
  const double ox = std::max(dx, 0.0), oz = std::max(dz, 0.0);
  return std::sqrt(ox * ox + oz * oz) + std::min(std::max(dx, dz), 0.0);
}

Aabb transformed_box(const Aabb& local_box, const RigidTransform& t) {
  Aabb out;
  for (int c = 0; c < 8; ++c) {
    Vec3 p((c & 1) ? local_box.max.x() : local_box.min.x(),
           (c & 2) ? local_box.max.y() : local_box.min.y(),
           (c & 4) ? local_box.max.z() : local_box.min.z());
    out.extend(t.apply(p));
  }
  return out;
}

}  // namespace

AnalyticSdf AnalyticSdf::sphere(double r, const Vec3& at) {
  return {Kind::sphere, {r}, {}, RigidTransform::from_translation(at)};
}
AnalyticSdf AnalyticSdf::box(const Vec3& half, const Vec3& at) {
  return {Kind::box, {half.x(), half.y(), half.z()}, {},
          RigidTransform::from_translation(at)};
}
AnalyticSdf AnalyticSdf::cylinder(double r, double half_h, const Vec3& at) {
  return {Kind::cylinder, {r, half_h}, {}, RigidTransform::from_translation(at)};
}
AnalyticSdf AnalyticSdf::plane() { return {Kind::plane, {}, {}, {}}; }
AnalyticSdf AnalyticSdf::make_union(std::vector<AnalyticSdf> children) {
  return {Kind::union_of, {}, std::move(children), {}};
}

double AnalyticSdf::distance(const Vec3& p_parent) const {
  const Vec3 p = local.inverse().apply(p_parent);
  switch (kind) {
    case Kind::sphere: return p.norm() - params[0];
    case Kind::box: return box_distance(p, Vec3(params[0], params[1], params[2]));
    case Kind::cylinder: return cylinder_distance(p, params[0], params[1]);
    case Kind::plane: return p.z();
    case Kind::union_of: {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& c : children) d = std::min(d, c.distance(p));
      return d;
    }
  }
  return std::numeric_limits<double>::infinity();
}

Vec3 AnalyticSdf::normal(const Vec3& p, double h) const {
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    Vec3 lo = p, hi = p;
    lo[a] -= h;
    hi[a] += h;
    g[a] = distance(hi) - distance(lo);
  }
  const double n = g.norm();
  return n > 0 ? Vec3(g / n) : Vec3::UnitZ();
}

Aabb AnalyticSdf::bounds() const {
  Aabb local_box;
  switch (kind) {
    case Kind::sphere:
      local_box = {Vec3::Constant(-params[0]), Vec3::Constant(params[0])};
      break;
    case Kind::box: {
      const Vec3 h(params[0], params[1], params[2]);
      local_box = {-h, h};
      break;
    }
    case Kind::cylinder: {
      const Vec3 h(params[0], params[0], params[1]);
      local_box = {-h, h};
      break;
    }
    case Kind::plane: return {};
    case Kind::union_of:
      for (const auto& c : children) local_box.extend(c.bounds());
      if (local_box.empty()) return {};
      break;
  }
  return transformed_box(local_box, local);
}

void AnalyticSdf::validate() const {
  std::size_t expected = 0;
  switch (kind) {
    case Kind::sphere: expected = 1; break;
    case Kind::box: expected = 3; break;
    case Kind::cylinder: expected = 2; break;
    case Kind::plane: expected = 0; break;
    case Kind::union_of: expected = 0; break;
  }
  require(params.size() == expected,
          std::string("analytic ") + to_string(kind) + ": expected " +
              std::to_string(expected) + " params");
  for (double v : params)
    require(v > 0 && std::isfinite(v),
            std::string("analytic ") + to_string(kind) + ": extents must be positive");
  require(kind == Kind::union_of || children.empty(),
          "analytic: only unions have children");
  require(kind != Kind::union_of || !children.empty(), "analytic union: no children");
  require(local.valid(), "analytic: local transform is not rigid");
  for (const auto& c : children) c.validate();
}

const char* to_string(AnalyticSdf::Kind kind) {
  switch (kind) {
    case AnalyticSdf::Kind::sphere: return "sphere";
    case AnalyticSdf::Kind::box: return "box";
    case AnalyticSdf::Kind::cylinder: return "cylinder";
    case AnalyticSdf::Kind::plane: return "plane";
    case AnalyticSdf::Kind::union_of: return "union";
  }
  return "?";
}

AnalyticSdf::Kind analytic_kind_from_string(const std::string& s) {
  using K = AnalyticSdf::Kind;
  if (s == "sphere") return K::sphere;
  if (s == "box") return K::box;
  if (s == "cylinder") return K::cylinder;
  if (s == "plane") return K::plane;
  if (s == "union") return K::union_of;
  fail(ErrorCode::parse, "unknown analytic kind '" + s + "'");
}

SdfGrid rasterize(const AnalyticSdf& a, const GridSpec& spec) {
  SdfGrid grid(spec);
  const auto& d = spec.dims;
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i)
        grid.set(i, j, k, a.distance(spec.point(i, j, k)));
  return grid;
}

}  // namespace sceneforge
