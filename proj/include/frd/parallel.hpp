#ifndef FRD_PARALLEL_HPP
#define FRD_PARALLEL_HPP

#include <functional>
#include <thread>
#include <vector>

namespace frd {

// Static contiguous chunking so results are reproducible for a fixed thread
// count; reductions must combine chunks in index order.
inline void parallel_for(long n, int threads, const std::function<void(long, long)>& run_chunk) {
    if (n <= 0) return;
    if (threads <= 1 || n == 1) {
        run_chunk(0, n);
        return;
    }
    int workers = static_cast<int>(std::min<long>(threads, n));
    long base = n / workers, extra = n % workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    long begin = 0;
    for (int t = 0; t < workers; ++t) {
        long len = base + (t < extra ? 1 : 0);
        pool.emplace_back(run_chunk, begin, begin + len);
        begin += len;
    }
    for (auto& th : pool) th.join();
}

} // namespace frd

#endif
