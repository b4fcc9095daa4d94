#include "fovea/parallel.hpp"

#include <algorithm>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fovea {

namespace {
thread_local bool in_parallel_region = false;
}

struct ThreadPool::Impl {
    std::mutex mu;
    std::condition_variable cv_work;
    std::condition_variable cv_done;
    std::vector<std::thread> workers;
    int nthreads = 1;

    // current job
    std::uint64_t generation = 0;
    const RangeFn* fn = nullptr;
    std::int64_t total = 0;
    int job_threads = 1;
    int pending = 0;
    std::exception_ptr error;
    bool shutdown = false;

    void worker_main(int slot) {
        std::uint64_t seen = 0;
        std::unique_lock<std::mutex> lk(mu);
        for (;;) {
            cv_work.wait(lk, [&] { return shutdown || (generation != seen && fn); });
            if (shutdown) return;
            seen = generation;
            if (slot < job_threads) {
                auto [b, e] = chunk(total, job_threads, slot);
                const RangeFn* f = fn;
                lk.unlock();
                std::exception_ptr err;
                in_parallel_region = true;
                try {
                    if (b < e) (*f)(b, e, slot);
                } catch (...) {
                    err = std::current_exception();
                }
                in_parallel_region = false;
                lk.lock();
                if (err && !error) error = err;
            }
            if (--pending == 0) cv_done.notify_all();
        }
    }

    static std::pair<std::int64_t, std::int64_t> chunk(std::int64_t n, int parts, int i) {
        std::int64_t b = n * i / parts;
        std::int64_t e = n * (i + 1) / parts;
        return {b, e};
    }

    void ensure_workers(int want) {
        // workers are lazily spawned up to want-1 (the caller acts as slot 0)
        while (static_cast<int>(workers.size()) < want - 1) {
            int slot = static_cast<int>(workers.size()) + 1;
            workers.emplace_back([this, slot] { worker_main(slot); });
        }
    }
};

ThreadPool::ThreadPool() : impl_(new Impl) {
    unsigned hw = std::thread::hardware_concurrency();
    impl_->nthreads = hw ? static_cast<int>(hw) : 1;
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard<std::mutex> lk(impl_->mu);
        impl_->shutdown = true;
    }
    impl_->cv_work.notify_all();
    for (auto& t : impl_->workers) t.join();
    delete impl_;
}

ThreadPool& ThreadPool::instance() {
    static ThreadPool pool;
    return pool;
}

void ThreadPool::set_threads(int n) {
    std::lock_guard<std::mutex> lk(impl_->mu);
    impl_->nthreads = std::max(1, n);
}

int ThreadPool::threads() const { return impl_->nthreads; }

void ThreadPool::run(std::int64_t n, const RangeFn& fn) {
    if (n <= 0) return;
    int t = static_cast<int>(std::min<std::int64_t>(impl_->nthreads, n));
    // nested regions run inline on the calling worker
    if (t <= 1 || in_parallel_region) {
        fn(0, n, 0);
        return;
    }
    std::unique_lock<std::mutex> lk(impl_->mu);
    impl_->ensure_workers(t);
    impl_->fn = &fn;
    impl_->total = n;
    impl_->job_threads = t;
    impl_->pending = static_cast<int>(impl_->workers.size()) + 1;
    impl_->error = nullptr;
    ++impl_->generation;
    lk.unlock();
    impl_->cv_work.notify_all();

    auto [b, e] = Impl::chunk(n, t, 0);
    std::exception_ptr caller_err;
    in_parallel_region = true;
    try {
        if (b < e) fn(b, e, 0);
    } catch (...) {
        caller_err = std::current_exception();
    }
    in_parallel_region = false;

    lk.lock();
    if (--impl_->pending != 0)
        impl_->cv_done.wait(lk, [&] { return impl_->pending == 0; });
    impl_->fn = nullptr;
    std::exception_ptr err = caller_err ? caller_err : impl_->error;
    lk.unlock();
    if (err) std::rethrow_exception(err);
}

} // namespace fovea
