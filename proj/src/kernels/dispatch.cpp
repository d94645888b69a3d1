#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"
#include "sceneforge/kernels/kernels.hpp"
#include "sceneforge/util/error.hpp"

namespace sceneforge::kernels {

namespace {

SimdLevel detect() {
  if (const char* env = std::getenv("SCENEFORGE_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return SimdLevel::scalar;
  }
  return avx2_available() ? SimdLevel::avx2 : SimdLevel::scalar;
}

std::atomic<int> g_forced{-1};

}  // namespace

bool avx2_available() {
#if defined(SCENEFORGE_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok;
#else
  return false;
#endif
}

SimdLevel active_level() {
  const int forced = g_forced.load();
  if (forced >= 0) return static_cast<SimdLevel>(forced);
  static const SimdLevel level = detect();
  return level;
}

void force_level(SimdLevel level) {
  require(level == SimdLevel::scalar || avx2_available(),
          "force_level: AVX2 not available on this CPU");
  g_forced = static_cast<int>(level);
}

const char* to_string(SimdLevel level) {
  return level == SimdLevel::avx2 ? "avx2" : "scalar";
}

void nearest_neighbors(const PointsSoA& q, const PointsSoA& t,
                       std::span<double> out_d2, std::span<std::uint32_t> out_idx,
                       SimdLevel level) {
  require(t.size() > 0, "nearest_neighbors: empty target set");
  require(out_d2.size() >= q.size() && out_idx.size() >= q.size(),
          "nearest_neighbors: output too small");
#ifdef SCENEFORGE_HAVE_AVX2_TU
  if (level == SimdLevel::avx2 && avx2_available()) {
    detail::nearest_avx2(q.x.data(), q.y.data(), q.z.data(), q.size(), t.x.data(),
                         t.y.data(), t.z.data(), t.size(), out_d2.data(),
                         out_idx.data());
    return;
  }
#endif
  detail::nearest_scalar(q.x.data(), q.y.data(), q.z.data(), q.size(), t.x.data(),
                         t.y.data(), t.z.data(), t.size(), out_d2.data(),
                         out_idx.data());
}

void transform_points(const PointsSoA& in, const double rotation[9],
                      const double translation[3], PointsSoA& out,
                      SimdLevel level) {
  out.x.resize(in.size());
  out.y.resize(in.size());
  out.z.resize(in.size());
#ifdef SCENEFORGE_HAVE_AVX2_TU
  if (level == SimdLevel::avx2 && avx2_available()) {
    detail::transform_avx2(in.x.data(), in.y.data(), in.z.data(), in.size(),
                           rotation, translation, out.x.data(), out.y.data(),
                           out.z.data());
    return;
  }
#endif
  detail::transform_scalar(in.x.data(), in.y.data(), in.z.data(), in.size(),
                           rotation, translation, out.x.data(), out.y.data(),
                           out.z.data());
}

}  // namespace sceneforge::kernels
