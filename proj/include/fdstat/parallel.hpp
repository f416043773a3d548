#ifndef FDSTAT_PARALLEL_HPP
#define FDSTAT_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fdstat {

inline int resolve_threads(int requested)
{
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n). Work is handed out dynamically, so fn must write
// only to slot i of its output; callers reduce in index order afterwards.
// The first exception thrown by any task is rethrown on the calling thread.
template <typename Fn>
void parallel_for(long n, int threads, Fn&& fn)
{
    threads = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(std::max(1L, n))));
    if (threads == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (;;) {
            long i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (!err) err = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    pool.clear();
    if (err) std::rethrow_exception(err);
}

// Fixed-shape pairwise reduction: the summation tree depends only on the
// number of terms, never on scheduling.
template <typename T>
T pairwise_sum(const std::vector<T>& v, std::size_t lo, std::size_t hi)
{
    if (hi - lo == 0) return T{};
    if (hi - lo == 1) return v[lo];
    std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

template <typename T>
T pairwise_sum(const std::vector<T>& v)
{
    return pairwise_sum(v, 0, v.size());
}

} // namespace fdstat

#endif
