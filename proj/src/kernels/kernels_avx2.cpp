#include "kernels_impl.hpp"

#include <immintrin.h>

#include <limits>

namespace sceneforge::kernels::detail {

void nearest_avx2(const double* qx, const double* qy, const double* qz,
                  std::size_t nq, const double* tx, const double* ty,
                  const double* tz, std::size_t nt, double* out_d2,
                  std::uint32_t* out_idx) {
  const std::size_t blocks = nt / 4 * 4;
  const __m256d step = _mm256_set1_pd(4.0);
  for (std::size_t i = 0; i < nq; ++i) {
    const __m256d px = _mm256_set1_pd(qx[i]);
    const __m256d py = _mm256_set1_pd(qy[i]);
    const __m256d pz = _mm256_set1_pd(qz[i]);
    __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    // Indices are carried as doubles; exact up to 2^53.
    __m256d best_idx = _mm256_setzero_pd();
    __m256d idx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    for (std::size_t j = 0; j < blocks; j += 4) {
      const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(tx + j), px);
      const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ty + j), py);
      const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(tz + j), pz);
      const __m256d d = _mm256_add_pd(
          _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
          _mm256_mul_pd(dz, dz));
      const __m256d lt = _mm256_cmp_pd(d, best, _CMP_LT_OQ);
      best = _mm256_blendv_pd(best, d, lt);
      best_idx = _mm256_blendv_pd(best_idx, idx, lt);
      idx = _mm256_add_pd(idx, step);
    }
    alignas(32) double lane_d[4];
    alignas(32) double lane_i[4];
    _mm256_store_pd(lane_d, best);
    _mm256_store_pd(lane_i, best_idx);
    double b = std::numeric_limits<double>::infinity();
    std::uint32_t arg = 0;
    for (int l = 0; l < 4; ++l) {
      const auto li = static_cast<std::uint32_t>(lane_i[l]);
      if (lane_d[l] < b || (lane_d[l] == b && li < arg)) {
        b = lane_d[l];
        arg = li;
      }
    }
    for (std::size_t j = blocks; j < nt; ++j) {
      const double dx = tx[j] - qx[i];
      const double dy = ty[j] - qy[i];
      const double dz = tz[j] - qz[i];
      const double d = (dx * dx + dy * dy) + dz * dz;
      if (d < b) {
        b = d;
        arg = static_cast<std::uint32_t>(j);
      }
    }
    out_d2[i] = b;
    out_idx[i] = arg;
  }
}

void transform_avx2(const double* x, const double* y, const double* z,
                    std::size_t n, const double* r, const double* t, double* ox,
                    double* oy, double* oz) {
  const std::size_t blocks = n / 4 * 4;
  __m256d R[9];
  for (int k = 0; k < 9; ++k) R[k] = _mm256_set1_pd(r[k]);
  const __m256d T0 = _mm256_set1_pd(t[0]);
  const __m256d T1 = _mm256_set1_pd(t[1]);
  const __m256d T2 = _mm256_set1_pd(t[2]);
  for (std::size_t i = 0; i < blocks; i += 4) {
    const __m256d px = _mm256_loadu_pd(x + i);
    const __m256d py = _mm256_loadu_pd(y + i);
    const __m256d pz = _mm256_loadu_pd(z + i);
    auto row = [&](int k, __m256d tr) {
      return _mm256_add_pd(
          _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(R[k], px), _mm256_mul_pd(R[k + 1], py)),
                        _mm256_mul_pd(R[k + 2], pz)),
          tr);
    };
    _mm256_storeu_pd(ox + i, row(0, T0));
    _mm256_storeu_pd(oy + i, row(3, T1));
    _mm256_storeu_pd(oz + i, row(6, T2));
  }
  for (std::size_t i = blocks; i < n; ++i) {
    const double px = x[i], py = y[i], pz = z[i];
    ox[i] = ((r[0] * px + r[1] * py) + r[2] * pz) + t[0];
    oy[i] = ((r[3] * px + r[4] * py) + r[5] * pz) + t[1];
    oz[i] = ((r[6] * px + r[7] * py) + r[8] * pz) + t[2];
  }
}

}  // namespace sceneforge::kernels::detail
