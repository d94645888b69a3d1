#pragma once

// Raw-pointer entry points shared by the per-ISA translation units. This
// header must stay free of inline code so nothing compiled with -mavx2
// can be merged into scalar callers.

#include <cstddef>
#include <cstdint>

namespace sceneforge::kernels::detail {

void nearest_scalar(const double* qx, const double* qy, const double* qz,
                    std::size_t nq, const double* tx, const double* ty,
                    const double* tz, std::size_t nt, double* out_d2,
                    std::uint32_t* out_idx);
void transform_scalar(const double* x, const double* y, const double* z,
                      std::size_t n, const double* r, const double* t,
                      double* ox, double* oy, double* oz);

#if defined(__x86_64__) || defined(_M_X64)
#define SCENEFORGE_HAVE_AVX2_TU 1
void nearest_avx2(const double* qx, const double* qy, const double* qz,
                  std::size_t nq, const double* tx, const double* ty,
                  const double* tz, std::size_t nt, double* out_d2,
                  std::uint32_t* out_idx);
void transform_avx2(const double* x, const double* y, const double* z,
                    std::size_t n, const double* r, const double* t, double* ox,
                    double* oy, double* oz);
#endif

}  // namespace sceneforge::kernels::detail
