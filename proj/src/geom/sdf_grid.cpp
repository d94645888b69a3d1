#include "sceneforge/geom/sdf_grid.hpp"

#include <cmath>

#include "sceneforge/util/error.hpp"

namespace sceneforge {

bool GridSpec::valid() const {
  return spacing > 0 && truncation > 0 && dims[0] >= 2 && dims[1] >= 2 &&
         dims[2] >= 2 && origin.allFinite();
}

SdfGrid::SdfGrid(const GridSpec& spec, bool with_weights) : spec_(spec) {
  require(spec.valid(), "SdfGrid: spacing/truncation must be positive and dims >= 2");
  values_.assign(spec.size(), static_cast<float>(spec.truncation));
  if (with_weights) weights_.assign(spec.size(), 0.0f);
}

std::array<int, 3> SdfGrid::coords(std::size_t idx) const {
  const std::size_t nx = spec_.dims[0], ny = spec_.dims[1];
  return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
          static_cast<int>(idx / (nx * ny))};
}

void SdfGrid::set(std::size_t idx, double v) {
  const double t = spec_.truncation;
  values_[idx] = static_cast<float>(std::clamp(v, -t, t));
}

void SdfGrid::enable_weights(float initial) {
  weights_.assign(values_.size(), initial);
}

double SdfGrid::sample(const Vec3& p) const {
  const Vec3 g = (p - spec_.origin) / spec_.spacing;
  const auto& d = spec_.dims;
  for (int a = 0; a < 3; ++a) {
    if (!(g[a] >= 0.0) || g[a] > d[a] - 1) return spec_.truncation;
  }
  int i0[3];
  double f[3];
  for (int a = 0; a < 3; ++a) {
    i0[a] = std::min(static_cast<int>(g[a]), d[a] - 2);
    f[a] = g[a] - i0[a];
  }
  const std::size_t sx = 1, sy = d[0], sz = static_cast<std::size_t>(d[0]) * d[1];
  const std::size_t base = index(i0[0], i0[1], i0[2]);
  const float* v = values_.data() + base;
  const double c00 = v[0] + (v[sx] - static_cast<double>(v[0])) * f[0];
  const double c10 = v[sy] + (v[sy + sx] - static_cast<double>(v[sy])) * f[0];
  const double c01 = v[sz] + (v[sz + sx] - static_cast<double>(v[sz])) * f[0];
  const double c11 =
      v[sz + sy] + (v[sz + sy + sx] - static_cast<double>(v[sz + sy])) * f[0];
  const double c0 = c00 + (c10 - c00) * f[1];
  const double c1 = c01 + (c11 - c01) * f[1];
  return c0 + (c1 - c0) * f[2];
}

GradientSample SdfGrid::gradient(const Vec3& p) const {
  GradientSample out;
  const double h = spec_.spacing;
  const Aabb box = bounds();
  if (!box.contains(p)) {
    out.one_sided = true;
    return out;
  }
  const double center = sample(p);
  for (int a = 0; a < 3; ++a) {
    Vec3 lo = p, hi = p;
    lo[a] -= h;
    hi[a] += h;
    const bool has_lo = lo[a] >= box.min[a];
    const bool has_hi = hi[a] <= box.max[a];
    if (has_lo && has_hi) {
      out.value[a] = (sample(hi) - sample(lo)) / (2 * h);
    } else if (has_hi) {
      out.value[a] = (sample(hi) - center) / h;
      out.one_sided = true;
    } else if (has_lo) {
      out.value[a] = (center - sample(lo)) / h;
      out.one_sided = true;
    } else {
      out.one_sided = true;
    }
  }
  return out;
}

std::array<int, 3> SdfGrid::nearest_node(const Vec3& p) const {
  std::array<int, 3> c{};
  for (int a = 0; a < 3; ++a) {
    const double g = std::round((p[a] - spec_.origin[a]) / spec_.spacing);
    c[a] = static_cast<int>(std::clamp(g, 0.0, double(spec_.dims[a] - 1)));
  }
  return c;
}

bool SdfGrid::operator==(const SdfGrid& o) const {
  return spec_.origin == o.spec_.origin && spec_.spacing == o.spec_.spacing &&
         spec_.dims == o.spec_.dims && spec_.truncation == o.spec_.truncation &&
         values_ == o.values_ && weights_ == o.weights_;
}

}  // namespace sceneforge
