#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace regcorr::detail {

// Runs fn(begin, end) over fixed-size blocks of [0, n). Blocks are a
// function of n only, never of the thread count, and every output element
// must be written by exactly one block; results are therefore bit-identical
// for any number of workers.
inline void parallel_blocks(std::int64_t n, std::int64_t block_size, int threads,
                            const std::function<void(std::int64_t, std::int64_t)>& fn) {
    if (n <= 0) return;
    if (block_size <= 0) block_size = 1;
    const std::int64_t n_blocks = (n + block_size - 1) / block_size;

    auto run_block = [&](std::int64_t b) {
        const std::int64_t begin = b * block_size;
        const std::int64_t end = begin + block_size < n ? begin + block_size : n;
        fn(begin, end);
    };

    if (threads <= 1 || n_blocks <= 1) {
        for (std::int64_t b = 0; b < n_blocks; ++b) run_block(b);
        return;
    }

    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::int64_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            run_block(b);
        }
    };

    const int n_workers = threads < static_cast<int>(n_blocks) ? threads : static_cast<int>(n_blocks);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers - 1));
    for (int t = 1; t < n_workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

}  // namespace regcorr::detail
