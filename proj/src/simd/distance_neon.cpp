#include <arm_neon.h>

#include "lfshield/simd/distance.hpp"

namespace lfshield::simd {

// Two rows per vector; vmulq + vaddq (not vfmaq) to match the scalar rounding.
void squared_distances_neon(const double* columns, std::size_t n_rows, std::size_t dim, const double* query,
                            double* out) noexcept {
    std::size_t r = 0;
    for (; r + 4 <= n_rows; r += 4) {
        float64x2_t acc0 = vdupq_n_f64(0.0);
        float64x2_t acc1 = vdupq_n_f64(0.0);
        for (std::size_t d = 0; d < dim; ++d) {
            const double* col = columns + d * n_rows + r;
            const float64x2_t q = vdupq_n_f64(query[d]);
            const float64x2_t d0 = vsubq_f64(vld1q_f64(col), q);
            const float64x2_t d1 = vsubq_f64(vld1q_f64(col + 2), q);
            acc0 = vaddq_f64(acc0, vmulq_f64(d0, d0));
            acc1 = vaddq_f64(acc1, vmulq_f64(d1, d1));
        }
        vst1q_f64(out + r, acc0);
        vst1q_f64(out + r + 2, acc1);
    }
    for (; r < n_rows; ++r) {
        double acc = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = columns[d * n_rows + r] - query[d];
            acc += diff * diff;
        }
        out[r] = acc;
    }
}

}  // namespace lfshield::simd
