#pragma once

#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace weierdyn {

// WEIER_THREADS caps worker count; 0/unset means hardware concurrency.
inline unsigned thread_budget() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("WEIER_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return hw;
}

// Runs f(i) for i in [0, n). Work is split into contiguous index blocks, one
// per worker, so outputs written to slot i are byte-identical for any worker
// count. f must only write to its own slots.
template <class F>
void parallel_for(std::size_t n, F&& f, unsigned threads = 0) {
    if (threads == 0) threads = thread_budget();
    if (threads > n) threads = static_cast<unsigned>(n ? n : 1);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr first_error;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t lo = n * t / threads;
        std::size_t hi = n * (t + 1) / threads;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace weierdyn
