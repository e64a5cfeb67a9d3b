#ifndef LOCCLAB_PARALLEL_HPP
#define LOCCLAB_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace locc {

// LOCC_LAB_THREADS caps the worker count; unset means hardware concurrency.
inline std::size_t thread_budget()
{
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("LOCC_LAB_THREADS")) {
        try {
            long v = std::stol(env);
            if (v >= 1)
                return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return hw;
}

// Runs fn(i) for i in [0, n). Each index is handled exactly once, so results
// written by index do not depend on scheduling. The first exception thrown
// by any worker is rethrown on the caller.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t max_threads = thread_budget())
{
    const std::size_t workers = std::min(n, std::max<std::size_t>(1, max_threads));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lk(err_mu);
                if (!err)
                    err = std::current_exception();
                next.store(n);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 0; t + 1 < workers; ++t)
        pool.emplace_back(body);
    body();
    for (auto& th : pool)
        th.join();
    if (err)
        std::rethrow_exception(err);
}

}  // namespace locc

#endif  // LOCCLAB_PARALLEL_HPP
