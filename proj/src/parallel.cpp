#include "dsc/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace dsc {

unsigned default_threads() {
    if (const char* env = std::getenv("DSCSIM_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    return hw > 8 ? 8 : hw;
}

void parallel_chunks(std::int64_t count, std::int64_t chunk_size,
                     const std::function<void(std::int64_t, std::int64_t, std::size_t)>& fn,
                     unsigned threads) {
    if (count <= 0) return;
    if (chunk_size < 1) chunk_size = 1;
    const std::size_t n_chunks = chunk_count(count, chunk_size);
    if (threads == 0) threads = default_threads();
    if (threads > n_chunks) threads = static_cast<unsigned>(n_chunks);

    if (threads <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            std::int64_t begin = static_cast<std::int64_t>(c) * chunk_size;
            std::int64_t end = begin + chunk_size < count ? begin + chunk_size : count;
            fn(begin, end, c);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= n_chunks || failed.load()) return;
            std::int64_t begin = static_cast<std::int64_t>(c) * chunk_size;
            std::int64_t end = begin + chunk_size < count ? begin + chunk_size : count;
            try {
                fn(begin, end, c);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace dsc
