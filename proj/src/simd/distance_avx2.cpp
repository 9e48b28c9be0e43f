#include <immintrin.h>

#include "lfshield/simd/distance.hpp"

namespace lfshield::simd {

// Four rows per lane group, eight per iteration. No FMA: fused rounding
// would break equivalence with the scalar kernel.
void squared_distances_avx2(const double* columns, std::size_t n_rows, std::size_t dim, const double* query,
                            double* out) noexcept {
    std::size_t r = 0;
    for (; r + 8 <= n_rows; r += 8) {
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        for (std::size_t d = 0; d < dim; ++d) {
            const double* col = columns + d * n_rows + r;
            const __m256d q = _mm256_set1_pd(query[d]);
            const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(col), q);
            const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(col + 4), q);
            acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
            acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
        }
        _mm256_storeu_pd(out + r, acc0);
        _mm256_storeu_pd(out + r + 4, acc1);
    }
    for (; r + 4 <= n_rows; r += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t d = 0; d < dim; ++d) {
            const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(columns + d * n_rows + r), _mm256_set1_pd(query[d]));
            acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
        }
        _mm256_storeu_pd(out + r, acc);
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
