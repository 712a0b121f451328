#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace vtseg {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Work items must be
// independent; callers that need a deterministic merge do it afterwards in
// canonical index order. workers <= 1 runs inline.
inline void parallel_for_index(std::int64_t n, int workers,
                               const std::function<void(std::int64_t)>& fn)
{
    if (n <= 0)
        return;
    if (workers <= 1 || n == 1) {
        for (std::int64_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    const int nthreads = static_cast<int>(std::min<std::int64_t>(workers, n));
    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t)
        threads.emplace_back([&] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= n)
                    return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error)
                        first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : threads)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

} // namespace vtseg
