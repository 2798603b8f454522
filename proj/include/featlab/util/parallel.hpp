#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace featlab {

// worker cap: explicit request, else PINN_FEATLAB_THREADS, else hardware
inline int worker_count(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PINN_FEATLAB_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Run f(i) for i in [0, n) on up to `threads` workers. Each task must be
// independent and deterministic; results keyed by index stay reproducible
// whatever the scheduling.
template <class F>
void parallel_for_index(int n, int threads, F&& f) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace featlab
