#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace spectral {

/// Worker cap: SPECTRAL_CERTIFY_THREADS when set, hardware concurrency
/// otherwise, never below 1.
inline int worker_count() {
    if (const char* env = std::getenv("SPECTRAL_CERTIFY_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Splits [0, total) into one contiguous chunk per worker and runs
/// fn(worker, begin, end). Results must be merged commutatively by the
/// caller so the outcome is independent of the split.
inline void parallel_chunks(long total, const std::function<void(int, long, long)>& fn) {
    const int workers = static_cast<int>(std::min<long>(worker_count(), std::max<long>(total, 1)));
    if (workers <= 1) {
        fn(0, 0, total);
        return;
    }
    std::vector<std::thread> pool;
    const long chunk = (total + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const long begin = w * chunk;
        const long end = std::min(total, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(fn, w, begin, end);
    }
    for (auto& t : pool) t.join();
}

}  // namespace spectral
