#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ayu {

// Process-wide worker count, set once by the CLI's --threads flag (no
// environment variables). Defaults to the hardware count.
inline unsigned& worker_count() {
    static unsigned n = std::thread::hardware_concurrency() ? std::thread::hardware_concurrency() : 1u;
    return n;
}

// Runs fn(chunk_index, begin, end) over contiguous chunks of [0, n).
// Chunks are fixed by `threads` alone, so callers that keep per-chunk partial
// results can combine them in chunk order. The first exception thrown by any
// chunk is rethrown on the calling thread.
template <class Fn>
void parallel_chunks(std::size_t n, Fn&& fn, unsigned threads = 0) {
    if (threads == 0) threads = worker_count();
    if (n == 0) return;
    if (threads > n) threads = static_cast<unsigned>(n);
    if (threads <= 1) {
        fn(std::size_t{0}, std::size_t{0}, n);
        return;
    }
    const std::size_t base = n / threads, extra = n % threads;
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    std::vector<std::exception_ptr> errs(threads);
    std::size_t begin = 0;
    for (unsigned c = 0; c < threads; ++c) {
        const std::size_t len = base + (c < extra ? 1 : 0);
        const std::size_t end = begin + len;
        auto work = [&fn, &errs, c, begin, end] {
            try {
                fn(std::size_t{c}, begin, end);
            } catch (...) {
                errs[c] = std::current_exception();
            }
        };
        if (c + 1 == threads)
            work();  // run the last chunk on this thread
        else
            pool.emplace_back(work);
        begin = end;
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

// Plain parallel map: fn(i) for each i in [0, n). Work items must be
// independent; each item's arithmetic runs entirely on one thread, so results
// do not depend on the worker count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = 0) {
    parallel_chunks(
        n,
        [&fn](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        },
        threads);
}

}
