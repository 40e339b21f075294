#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace cobs {

/// Process-wide cap on worker threads. Results never depend on this value:
/// parallel loops write to disjoint preallocated slots and reductions are
/// performed in index order afterwards.
void set_threads(int n);
int threads();

/// Static block partition of [0, n) across the configured thread count.
/// f(i) must only touch state owned by index i.
template <typename F>
void parallel_for(std::int64_t n, F&& f) {
    const int nthreads = threads();
    if (n <= 0) return;
    if (nthreads <= 1 || n == 1) {
        for (std::int64_t i = 0; i < n; ++i) f(i);
        return;
    }
    const int workers = static_cast<int>(std::min<std::int64_t>(nthreads, n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::int64_t i = w; i < n; i += workers) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace cobs
