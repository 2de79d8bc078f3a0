#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mteval {

// Deterministic parallel map: the body writes results keyed by index only, so
// output is identical for any jobs value. jobs == 1 runs the plain serial
// loop (kept as the reference path), jobs == 0 uses all hardware threads.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& body) {
#ifdef _OPENMP
    if (jobs != 1 && n > 1) {
        const int threads = jobs > 0 ? jobs : omp_get_max_threads();
        std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) {
        body(i);
    }
}

} // namespace mteval
