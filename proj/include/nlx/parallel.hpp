#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace nlx {

// Global worker count. The CLI sets it once; library calls only read it.
inline std::atomic<int>& worker_count_slot() {
    static std::atomic<int> n{0};  // 0 = not set, use hardware default
    return n;
}

inline void set_worker_count(int n) { worker_count_slot().store(n > 0 ? n : 0); }

inline int worker_count() {
    int n = worker_count_slot().load();
    if (n > 0) return n;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

// Splits [0, n) into `threads` contiguous slabs by index. Each worker produces its
// own partial state; partials are merged in slab order, so a fixed thread count
// gives bit-identical results and different counts agree to rounding.
template <class State, class Body, class Merge>
State parallel_reduce(std::size_t n, Body body, Merge merge, State init = State{}) {
    int threads = worker_count();
    if (n == 0) return init;
    if (threads <= 1 || n < 2048) {
        State s = init;
        body(0, n, s);
        return s;
    }
    std::size_t t = static_cast<std::size_t>(threads);
    std::vector<State> partial(t, init);
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::size_t chunk = (n + t - 1) / t;
    for (std::size_t i = 0; i < t; ++i) {
        std::size_t lo = std::min(i * chunk, n), hi = std::min(lo + chunk, n);
        pool.emplace_back([&, lo, hi, i] { body(lo, hi, partial[i]); });
    }
    for (auto& th : pool) th.join();
    State s = init;
    for (std::size_t i = 0; i < t; ++i) merge(s, partial[i]);
    return s;
}

template <class Body>
void parallel_for(std::size_t n, Body body) {  // body(lo, hi)
    struct none {};
    parallel_reduce<none>(
        n, [&](std::size_t lo, std::size_t hi, none&) { body(lo, hi); },
        [](none&, const none&) {});
}

}  // namespace nlx
