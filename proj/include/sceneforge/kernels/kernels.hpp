#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sceneforge::kernels {

// Data-parallel inner loops with a scalar reference and an AVX2 variant.
// Both variants perform the same floating-point operations in the same
// order (no fused multiply-add), so their results are bit-identical.

enum class SimdLevel { scalar, avx2 };

/// Best level supported by this CPU, unless overridden by
/// SCENEFORGE_SIMD=scalar or force_level().
SimdLevel active_level();
void force_level(SimdLevel level);
const char* to_string(SimdLevel level);
bool avx2_available();

/// Structure-of-arrays point cloud.
struct PointsSoA {
  std::vector<double> x, y, z;

  std::size_t size() const { return x.size(); }
  void reserve(std::size_t n) {
    x.reserve(n);
    y.reserve(n);
    z.reserve(n);
  }
  void push(double px, double py, double pz) {
    x.push_back(px);
    y.push_back(py);
    z.push_back(pz);
  }
};

/// For every query point, squared distance to (and index of) the nearest
/// target point. Ties resolve to the lowest target index. Targets must be
/// nonempty.
void nearest_neighbors(const PointsSoA& queries, const PointsSoA& targets,
                       std::span<double> out_dist2,
                       std::span<std::uint32_t> out_index,
                       SimdLevel level = active_level());

/// out = R * p + t for every point; R row-major 3x3.
void transform_points(const PointsSoA& in, const double rotation[9],
                      const double translation[3], PointsSoA& out,
                      SimdLevel level = active_level());

}  // namespace sceneforge::kernels
