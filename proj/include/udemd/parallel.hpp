#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace udemd {

// Runs body(i) for i in [0, count). Iterations must not share mutable state.
// The first exception thrown by any iteration is rethrown after the loop.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
#ifdef _OPENMP
    const auto n = static_cast<std::int64_t>(count);
    std::exception_ptr first;
    std::mutex guard;
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(guard);
            if (!first) first = std::current_exception();
        }
    }
    if (first) std::rethrow_exception(first);
#else
    for (std::size_t i = 0; i < count; ++i) body(i);
#endif
}

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace udemd
