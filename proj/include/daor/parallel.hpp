#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace daor {

/// Runs fn(begin, end) over contiguous chunks of [0, n) on up to `workers`
/// threads. Callers write per-index results and reduce after the join, so the
/// outcome is independent of the worker count and of scheduling.
template <typename Fn>
void parallel_chunks(std::size_t n, int workers, Fn&& fn) {
    if (n == 0) return;
    const std::size_t w = std::min<std::size_t>(std::max(workers, 1), n);
    if (w <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(w);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const std::size_t base = n / w;
    const std::size_t rem = n % w;
    std::size_t begin = 0;
    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t end = begin + base + (t < rem ? 1 : 0);
        threads.emplace_back([&fn, &first_error, &error_mutex, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& th : threads) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace daor
