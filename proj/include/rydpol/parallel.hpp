#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace rydpol {

/// Worker cap: RYDPOL_THREADS if set, else hardware concurrency.
inline int max_threads() {
    if (const char* env = std::getenv("RYDPOL_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

/// Runs fn(i) for i in [0, n). Each index owns its output slot, so results
/// are independent of the parallelism degree.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int threads = std::min<std::size_t>(max_threads(), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace rydpol
