#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "sceneforge/geom/types.hpp"

namespace sceneforge {

/// Placement of a dense grid: node (i,j,k) sits at origin + spacing*(i,j,k).
struct GridSpec {
  Vec3 origin = Vec3::Zero();
  double spacing = 0.01;
  std::array<int, 3> dims{2, 2, 2};
  double truncation = 0.04;

  std::size_t size() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  Vec3 point(int i, int j, int k) const {
    return origin + spacing * Vec3(i, j, k);
  }
  Vec3 upper() const {
    return origin + spacing * Vec3(dims[0] - 1, dims[1] - 1, dims[2] - 1);
  }
  Aabb bounds() const { return {origin, upper()}; }
  bool valid() const;
};

struct GradientSample {
  Vec3 value = Vec3::Zero();
  /// Set when p was too close to the boundary for a central difference.
  bool one_sided = false;
};

/// Dense truncated signed-distance volume, x-fastest storage. Values are
/// negative inside. An optional weight channel carries fusion confidence;
/// weight 0 means unobserved and the value is +truncation.
class SdfGrid {
 public:
  SdfGrid() = default;
  /// Grid filled with +truncation.
  explicit SdfGrid(const GridSpec& spec, bool with_weights = false);

  const GridSpec& spec() const { return spec_; }
  const Vec3& origin() const { return spec_.origin; }
  double spacing() const { return spec_.spacing; }
  const std::array<int, 3>& dims() const { return spec_.dims; }
  double truncation() const { return spec_.truncation; }
  std::size_t size() const { return values_.size(); }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(spec_.dims[0]) *
               (static_cast<std::size_t>(j) +
                static_cast<std::size_t>(spec_.dims[1]) * k);
  }
  std::array<int, 3> coords(std::size_t idx) const;
  Vec3 point(int i, int j, int k) const { return spec_.point(i, j, k); }
  Vec3 point(std::size_t idx) const {
    auto c = coords(idx);
    return point(c[0], c[1], c[2]);
  }

  float at(int i, int j, int k) const { return values_[index(i, j, k)]; }
  float at(std::size_t idx) const { return values_[idx]; }
  /// Stores v clamped to [-truncation, truncation].
  void set(std::size_t idx, double v);
  void set(int i, int j, int k, double v) { set(index(i, j, k), v); }

  std::span<const float> values() const { return values_; }
  std::span<float> values_mut() { return values_; }

  bool has_weights() const { return !weights_.empty(); }
  std::span<const float> weights() const { return weights_; }
  std::span<float> weights_mut() { return weights_; }
  float weight(std::size_t idx) const {
    return weights_.empty() ? 1.0f : weights_[idx];
  }
  void enable_weights(float initial = 0.0f);
  void drop_weights() { weights_.clear(); }

  /// Trilinear interpolation; points outside the node bounds read
  /// +truncation (unobserved space is empty).
  double sample(const Vec3& p) const;
  /// Central difference of sample() with step = spacing. Falls back to a
  /// one-sided difference near the boundary.
  GradientSample gradient(const Vec3& p) const;

  Aabb bounds() const { return spec_.bounds(); }
  bool inside_bounds(const Vec3& p) const { return bounds().contains(p); }

  /// Voxel with the nearest node to p, clamped into the grid.
  std::array<int, 3> nearest_node(const Vec3& p) const;

  bool operator==(const SdfGrid& o) const;

 private:
  GridSpec spec_;
  std::vector<float> values_;
  std::vector<float> weights_;
};

}  // namespace sceneforge
