#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace lfshield::simd {

// Distance kernels work on a column-major block: feature d of row r lives at
// columns[d * n_rows + r]. Every backend accumulates (x - q)^2 over features
// in ascending order with separate multiply and add, so all backends return
// bit-identical results.

enum class Backend { Scalar, Avx2, Neon };

std::string_view backend_name(Backend b) noexcept;

bool backend_available(Backend b) noexcept;

// Best available backend, unless overridden by set_backend() or the
// LFSHIELD_SIMD environment variable (scalar|avx2|neon).
Backend active_backend() noexcept;

// Throws ArgError if `b` is not available on this CPU/build.
void set_backend(Backend b);

void squared_distances_scalar(const double* columns, std::size_t n_rows, std::size_t dim, const double* query,
                              double* out) noexcept;

#if defined(LFSHIELD_HAVE_AVX2_KERNEL)
void squared_distances_avx2(const double* columns, std::size_t n_rows, std::size_t dim, const double* query,
                            double* out) noexcept;
#endif

#if defined(LFSHIELD_HAVE_NEON_KERNEL)
void squared_distances_neon(const double* columns, std::size_t n_rows, std::size_t dim, const double* query,
                            double* out) noexcept;
#endif

/// Squared Euclidean distance from `query` to each of the `out.size()` rows
/// of `columns`, through the active backend.
void squared_distances(std::span<const double> columns, std::span<const double> query, std::span<double> out);

/// Same, through an explicit backend (tests compare backends with this).
void squared_distances(Backend b, std::span<const double> columns, std::span<const double> query,
                       std::span<double> out);

}  // namespace lfshield::simd
