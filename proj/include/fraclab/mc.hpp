#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace fraclab {

// Runs fn(trial) for trial = 0..trials-1 on `workers` threads.  Each trial
// owns its outputs; callers index results by trial, so scheduling cannot
// change what is reported.
template <class F>
void parallel_trials(std::uint64_t trials, int workers, F&& fn) {
    if (workers <= 1 || trials <= 1) {
        for (std::uint64_t t = 0; t < trials; ++t) fn(t);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::uint64_t t = next.fetch_add(1);
            if (t >= trials) return;
            fn(t);
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(workers, static_cast<int>(trials));
    pool.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace fraclab
