#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace lbphy {

/// Worker count: hardware concurrency capped by the LBPHY_THREADS env var.
inline unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("LBPHY_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
    }
    return n;
}

/// Dynamic-chunk parallel loop over [0, n). fn must be thread-safe.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         std::size_t chunk = 1) {
    unsigned workers = worker_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            std::size_t lo = next.fetch_add(chunk);
            if (lo >= n) return;
            std::size_t hi = lo + chunk < n ? lo + chunk : n;
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
}

} // namespace lbphy
