#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace probefield {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Splits [0, n) into contiguous blocks, one per worker. fn(begin, end, tid).
// With n_threads == 1 the call runs inline on the calling thread, so results
// are bit-exact across runs.
template <class Fn>
void parallel_for(std::int64_t n, int n_threads, Fn&& fn) {
    if (n <= 0) return;
    n_threads = resolve_threads(n_threads);
    if (n_threads == 1 || n == 1) {
        fn(std::int64_t{0}, n, 0);
        return;
    }
    std::int64_t workers = std::min<std::int64_t>(n_threads, n);
    std::int64_t block = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (std::int64_t t = 0; t < workers; ++t) {
        std::int64_t b = t * block, e = std::min(n, b + block);
        pool.emplace_back([&fn, b, e, t] { fn(b, e, static_cast<int>(t)); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace probefield
