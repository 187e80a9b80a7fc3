#pragma once

#include <thread>
#include <vector>

namespace pra {

// Runs fn(i) for i in [0, n) across hardware threads and returns results
// indexed by i. Each call must derive its own rng stream from i so the
// outcome does not depend on scheduling.
template <typename R, typename Fn>
std::vector<R> parallel_map(size_t n, Fn&& fn) {
    std::vector<R> out(n);
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    if (workers <= 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    workers = std::min<unsigned>(workers, unsigned(n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (size_t i = w; i < n; i += workers) out[i] = fn(i);
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

} // namespace pra
