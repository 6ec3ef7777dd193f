#include "venomguard/common/threadpool.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace vg {

struct ThreadPool::Impl {
    std::vector<std::thread> workers;
    std::mutex m;
    std::condition_variable cv_work;
    std::condition_variable cv_done;
    const std::function<void(std::size_t, std::size_t)>* job = nullptr;
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    std::uint64_t epoch = 0;
    int pending = 0;
    bool stop = false;

    void worker(int idx) {
        std::uint64_t seen = 0;
        for (;;) {
            std::unique_lock lk(m);
            cv_work.wait(lk, [&] { return stop || epoch != seen; });
            if (stop) return;
            seen = epoch;
            auto [b, e] = ranges[idx];
            auto* f = job;
            lk.unlock();
            if (b < e) (*f)(b, e);
            lk.lock();
            if (--pending == 0) cv_done.notify_one();
        }
    }
};

ThreadPool::ThreadPool() : impl_(new Impl) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("VENOMGUARD_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
    }
    nthreads_ = static_cast<int>(hw);
    // worker 0 is the calling thread
    impl_->ranges.resize(nthreads_);
    for (int i = 1; i < nthreads_; ++i)
        impl_->workers.emplace_back([this, i] { impl_->worker(i); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard lk(impl_->m);
        impl_->stop = true;
    }
    impl_->cv_work.notify_all();
    for (auto& t : impl_->workers) t.join();
    delete impl_;
}

ThreadPool& ThreadPool::instance() {
    static ThreadPool pool;
    return pool;
}

void ThreadPool::parallel_for(std::size_t n, std::size_t min_parallel,
                              const std::function<void(std::size_t, std::size_t)>& f) {
    if (n == 0) return;
    if (nthreads_ == 1 || n < min_parallel) {
        f(0, n);
        return;
    }
    const std::size_t nt = static_cast<std::size_t>(nthreads_);
    const std::size_t chunk = (n + nt - 1) / nt;
    {
        std::lock_guard lk(impl_->m);
        impl_->job = &f;
        for (std::size_t t = 0; t < nt; ++t) {
            std::size_t b = t * chunk;
            std::size_t e = b + chunk < n ? b + chunk : n;
            impl_->ranges[t] = {b < n ? b : n, e};
        }
        impl_->pending = nthreads_ - 1;
        ++impl_->epoch;
    }
    impl_->cv_work.notify_all();
    auto [b0, e0] = impl_->ranges[0];
    if (b0 < e0) f(b0, e0);
    std::unique_lock lk(impl_->m);
    impl_->cv_done.wait(lk, [&] { return impl_->pending == 0; });
}

}  // namespace vg
