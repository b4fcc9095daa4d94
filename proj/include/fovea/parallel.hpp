#pragma once

#include <cstdint>
#include <functional>

namespace fovea {

// Process-wide worker pool. Work is split into one contiguous chunk per
// thread, so the set of (range -> thread slot) assignments is a pure function
// of (n, thread count); results are independent of scheduling order as long
// as chunks write disjoint outputs.
class ThreadPool {
public:
    // fn(chunk_begin, chunk_end, slot) with slot in [0, threads); slot is
    // stable for the chunk and usable as a scratch-buffer index.
    using RangeFn = std::function<void(std::int64_t, std::int64_t, int)>;

    static ThreadPool& instance();

    void set_threads(int n); // clamps to [1, hw]; 1 disables the pool
    int threads() const;

    void run(std::int64_t n, const RangeFn& fn);

private:
    ThreadPool();
    ~ThreadPool();
    ThreadPool(const ThreadPool&) = delete;
    struct Impl;
    Impl* impl_;
};

// Convenience wrapper over the singleton pool.
inline void parallel_for(std::int64_t n, const ThreadPool::RangeFn& fn) {
    ThreadPool::instance().run(n, fn);
}

} // namespace fovea
