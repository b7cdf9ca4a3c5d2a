#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace embias {

inline unsigned default_thread_count() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

// Runs fn(begin, end) over fixed-size chunks of [0, total). Chunk boundaries
// depend only on `total` and `chunk`, never on the thread count, so per-chunk
// outputs are identical at any parallelism degree. Callers that reduce must
// store per-chunk results and merge them in chunk order.
template <typename Fn>
void for_each_chunk(std::size_t total, std::size_t chunk, unsigned threads, Fn&& fn) {
    if (total == 0) return;
    if (chunk == 0) chunk = 1;
    const std::size_t n_chunks = (total + chunk - 1) / chunk;
    if (threads <= 1 || n_chunks == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            fn(c, c * chunk, std::min(total, (c + 1) * chunk));
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        try {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= n_chunks) return;
                fn(c, c * chunk, std::min(total, (c + 1) * chunk));
            }
        } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(n_chunks);  // drain remaining work
        }
    };
    std::vector<std::thread> pool;
    const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));
    pool.reserve(n_workers);
    for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Maps fn(i) -> T into a vector ordered by input index.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t total, unsigned threads, Fn&& fn, std::size_t chunk = 256) {
    std::vector<T> out(total);
    for_each_chunk(total, chunk, threads, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) out[i] = fn(i);
    });
    return out;
}

}  // namespace embias
