#pragma once

#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mdir {

/// Worker cap: MD_THREADS if set to a positive integer, else the hardware
/// concurrency. Results never depend on this value.
inline int worker_count() {
    if (const char* env = std::getenv("MD_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs body(i) for i in [0, n). Each index writes only its own output slot,
/// so scheduling cannot change results.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
#ifdef _OPENMP
    const int threads = worker_count();
    if (threads > 1 && n >= 2048) {
        const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) body(i);
}

} // namespace mdir
