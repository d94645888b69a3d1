#include "sceneforge/geom/distance_transform.hpp"

#include <cmath>
#include <limits>

namespace sceneforge {

namespace {

constexpr double kFar = 1e20;

// Felzenszwalb & Huttenlocher lower envelope of parabolas, in place over
// a strided line.
void edt_1d(double* f, std::size_t n, std::size_t stride, std::vector<double>& d,
            std::vector<int>& v, std::vector<double>& z) {
  d.resize(n);
  v.resize(n);
  z.resize(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < static_cast<int>(n); ++q) {
    auto intersect = [&](int p) {
      return ((f[q * stride] + double(q) * q) - (f[p * stride] + double(p) * p)) /
             (2.0 * (q - p));
    };
    double s = intersect(v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < static_cast<int>(n); ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k] * stride];
  }
  for (std::size_t q = 0; q < n; ++q) f[q * stride] = d[q];
}

}  // namespace

std::vector<double> squared_edt(const std::vector<std::uint8_t>& mask,
                                const std::array<int, 3>& dims) {
  const std::size_t nx = dims[0], ny = dims[1], nz = dims[2];
  std::vector<double> f(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) f[i] = mask[i] ? 0.0 : kFar;
  std::vector<double> d;
  std::vector<int> v;
  std::vector<double> z;
  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t j = 0; j < ny; ++j) edt_1d(&f[nx * (j + ny * k)], nx, 1, d, v, z);
  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t i = 0; i < nx; ++i) edt_1d(&f[i + nx * ny * k], ny, nx, d, v, z);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) edt_1d(&f[i + nx * j], nz, nx * ny, d, v, z);
  return f;
}

SdfGrid occupancy_to_sdf(const std::vector<std::uint8_t>& inside,
                         const GridSpec& spec) {
  SdfGrid grid(spec);
  std::vector<std::uint8_t> outside(inside.size());
  for (std::size_t i = 0; i < inside.size(); ++i) outside[i] = inside[i] ? 0 : 1;
  const auto to_inside = squared_edt(inside, spec.dims);
  const auto to_outside = squared_edt(outside, spec.dims);
  for (std::size_t i = 0; i < inside.size(); ++i) {
    double d;
    if (inside[i]) {
      d = to_outside[i] >= kFar ? -spec.truncation
                                : -(std::sqrt(to_outside[i]) - 0.5) * spec.spacing;
    } else {
      d = to_inside[i] >= kFar ? spec.truncation
                               : (std::sqrt(to_inside[i]) - 0.5) * spec.spacing;
    }
    grid.set(i, d);
  }
  return grid;
}

}  // namespace sceneforge
