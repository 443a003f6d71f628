#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace fdrelay {

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs body(i) for i in [0, n_tasks) on up to n_threads threads.
/// Work is claimed from a shared counter; deterministic results require the
/// caller to store per-task outputs by index (never order-dependent state).
template <typename F>
void parallel_for(std::size_t n_tasks, unsigned n_threads, F&& body) {
    n_threads = resolve_threads(n_threads);
    if (n_threads <= 1 || n_tasks <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n_tasks) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(n_tasks, std::memory_order_relaxed);  // drain remaining work
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    const unsigned spawned = static_cast<unsigned>(
        std::min<std::size_t>(n_threads, n_tasks) - 1);
    pool.reserve(spawned);
    for (unsigned t = 0; t < spawned; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fdrelay
