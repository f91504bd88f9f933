#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

// Chunked parallel loop with a process-wide worker cap. Work is partitioned
// by index range only, so results never depend on the thread count.

namespace efloat {

inline unsigned& worker_cap() noexcept {
    static unsigned cap = 0;  // 0 = hardware concurrency
    return cap;
}

inline void set_worker_cap(unsigned n) noexcept { worker_cap() = n; }

inline unsigned effective_workers(size_t items) {
    unsigned n = worker_cap();
    if (n == 0) n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (items < 2048) return 1;  // not worth spawning for
    return static_cast<unsigned>(std::min<size_t>(n, (items + 2047) / 2048));
}

template <typename Fn>  // Fn(size_t begin, size_t end)
void parallel_for(size_t count, Fn&& fn) {
    const unsigned workers = effective_workers(count);
    if (workers <= 1) {
        fn(size_t{0}, count);
        return;
    }
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const size_t chunk = (count + workers - 1) / workers;
    std::mutex err_mutex;
    for (unsigned t = 0; t < workers; ++t) {
        const size_t begin = t * chunk;
        const size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (!failed.exchange(true)) first_error = std::current_exception();
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (failed) std::rethrow_exception(first_error);
}

} // namespace efloat
