#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace bbm {

/// Worker count resolution: explicit argument > BBM_WORKERS env var >
/// hardware concurrency.
inline int resolve_workers(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("BBM_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Runs body(i) for i in [0, n) across `workers` threads. Each replicate owns
/// its slot / RNG stream, so results are identical for any worker count; the
/// caller merges per-replicate outputs in index order.
template <class Body>
void parallel_replicates(std::int64_t n, int workers, Body&& body) {
    workers = resolve_workers(workers);
    if (workers <= 1 || n < 2) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::int64_t i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace bbm
