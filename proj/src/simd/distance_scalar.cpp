#include "lfshield/simd/distance.hpp"

namespace lfshield::simd {

void squared_distances_scalar(const double* columns, std::size_t n_rows, std::size_t dim, const double* query,
                              double* out) noexcept {
    for (std::size_t r = 0; r < n_rows; ++r) out[r] = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        const double* col = columns + d * n_rows;
        const double q = query[d];
        for (std::size_t r = 0; r < n_rows; ++r) {
            const double diff = col[r] - q;
            out[r] += diff * diff;
        }
    }
}

}  // namespace lfshield::simd
