#ifndef IDRISK_PARALLEL_HPP
#define IDRISK_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace idrisk {

// Runs fn(i) for i in [0, n) on `threads` workers. Each index is processed
// exactly once; fn must write only to its own output slot so results are
// identical for every thread count.
template <typename Fn>
void parallel_for_index(std::size_t n, int threads, Fn&& fn) {
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto worker = [&]() {
        try {
            for (;;) {
                std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) return;
                fn(i);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    std::size_t nworkers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    pool.reserve(nworkers);
    for (std::size_t t = 0; t < nworkers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace idrisk

#endif // IDRISK_PARALLEL_HPP
