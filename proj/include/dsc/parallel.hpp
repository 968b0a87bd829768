#ifndef DSC_PARALLEL_HPP
#define DSC_PARALLEL_HPP

#include <cstdint>
#include <functional>

namespace dsc {

// Number of worker threads: DSCSIM_THREADS env var if set, else hardware_concurrency (capped at 8).
unsigned default_threads();

// Runs fn(begin, end, chunk_index) over [0, count) split into fixed-size chunks.
// Chunk boundaries depend only on chunk_size, never on the thread count, so any
// accumulation keyed by chunk_index and folded in chunk order is bit-reproducible.
void parallel_chunks(std::int64_t count, std::int64_t chunk_size,
                     const std::function<void(std::int64_t, std::int64_t, std::size_t)>& fn,
                     unsigned threads = 0);

inline std::size_t chunk_count(std::int64_t count, std::int64_t chunk_size) {
    return count <= 0 ? 0 : static_cast<std::size_t>((count + chunk_size - 1) / chunk_size);
}

}  // namespace dsc

#endif
