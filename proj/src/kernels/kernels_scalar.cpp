#include "kernels_impl.hpp"

#include <limits>

namespace sceneforge::kernels::detail {

void nearest_scalar(const double* qx, const double* qy, const double* qz,
                    std::size_t nq, const double* tx, const double* ty,
                    const double* tz, std::size_t nt, double* out_d2,
                    std::uint32_t* out_idx) {
  for (std::size_t i = 0; i < nq; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t arg = 0;
    for (std::size_t j = 0; j < nt; ++j) {
      const double dx = tx[j] - qx[i];
      const double dy = ty[j] - qy[i];
      const double dz = tz[j] - qz[i];
      const double d = (dx * dx + dy * dy) + dz * dz;
      if (d < best) {
        best = d;
        arg = static_cast<std::uint32_t>(j);
      }
    }
    out_d2[i] = best;
    out_idx[i] = arg;
  }
}

void transform_scalar(const double* x, const double* y, const double* z,
                      std::size_t n, const double* r, const double* t,
                      double* ox, double* oy, double* oz) {
  for (std::size_t i = 0; i < n; ++i) {
    const double px = x[i], py = y[i], pz = z[i];
    ox[i] = ((r[0] * px + r[1] * py) + r[2] * pz) + t[0];
    oy[i] = ((r[3] * px + r[4] * py) + r[5] * pz) + t[1];
    oz[i] = ((r[6] * px + r[7] * py) + r[8] * pz) + t[2];
  }
}

}  // namespace sceneforge::kernels::detail
