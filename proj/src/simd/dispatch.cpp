#include <atomic>
#include <cstdlib>
#include <string>

#include "lfshield/errors.hpp"
#include "lfshield/simd/distance.hpp"

namespace lfshield::simd {

namespace {

Backend detect_best() noexcept {
#if defined(LFSHIELD_HAVE_AVX2_KERNEL)
    if (__builtin_cpu_supports("avx2")) return Backend::Avx2;
#endif
#if defined(LFSHIELD_HAVE_NEON_KERNEL)
    return Backend::Neon;
#endif
    return Backend::Scalar;
}

Backend initial_backend() noexcept {
    if (const char* env = std::getenv("LFSHIELD_SIMD")) {
        const std::string name(env);
        for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon})
            if (name == backend_name(b) && backend_available(b)) return b;
    }
    return detect_best();
}

std::atomic<Backend>& current() noexcept {
    static std::atomic<Backend> backend{initial_backend()};
    return backend;
}

}  // namespace

std::string_view backend_name(Backend b) noexcept {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "unknown";
}

bool backend_available(Backend b) noexcept {
    switch (b) {
        case Backend::Scalar: return true;
        case Backend::Avx2:
#if defined(LFSHIELD_HAVE_AVX2_KERNEL)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Backend::Neon:
#if defined(LFSHIELD_HAVE_NEON_KERNEL)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
    if (!backend_available(b)) throw ArgError("SIMD backend '" + std::string(backend_name(b)) + "' is not available");
    current().store(b, std::memory_order_relaxed);
}

void squared_distances(Backend b, std::span<const double> columns, std::span<const double> query,
                       std::span<double> out) {
    const std::size_t n_rows = out.size();
    const std::size_t dim = query.size();
    if (columns.size() != n_rows * dim) throw DimensionError("distance block size does not match rows x dim");
    if (!backend_available(b)) throw ArgError("SIMD backend '" + std::string(backend_name(b)) + "' is not available");
    switch (b) {
#if defined(LFSHIELD_HAVE_AVX2_KERNEL)
        case Backend::Avx2:
            squared_distances_avx2(columns.data(), n_rows, dim, query.data(), out.data());
            return;
#endif
#if defined(LFSHIELD_HAVE_NEON_KERNEL)
        case Backend::Neon:
            squared_distances_neon(columns.data(), n_rows, dim, query.data(), out.data());
            return;
#endif
        default:
            squared_distances_scalar(columns.data(), n_rows, dim, query.data(), out.data());
            return;
    }
}

void squared_distances(std::span<const double> columns, std::span<const double> query, std::span<double> out) {
    squared_distances(active_backend(), columns, query, out);
}

}  // namespace lfshield::simd
