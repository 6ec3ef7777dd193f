#pragma once

#include <cstddef>
#include <functional>

namespace vg {

// Fixed-size pool with static range partitioning. Work is split into
// contiguous [begin,end) chunks, one per worker, so results never depend on
// the number of threads. Thread count is min(hardware, VENOMGUARD_THREADS).
class ThreadPool {
public:
    static ThreadPool& instance();

    int size() const { return nthreads_; }

    // Runs f(begin, end) over a partition of [0, n). Blocking. Falls back to
    // a single inline call when n < min_parallel or the pool has one thread.
    void parallel_for(std::size_t n, std::size_t min_parallel,
                      const std::function<void(std::size_t, std::size_t)>& f);

    ~ThreadPool();

private:
    ThreadPool();
    struct Impl;
    Impl* impl_;
    int nthreads_;
};

}  // namespace vg
