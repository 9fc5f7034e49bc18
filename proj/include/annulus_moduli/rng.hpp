#pragma once

// Deterministic random streams and a small stream-parallel driver.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include <boost/random/normal_distribution.hpp>

namespace annulus_moduli {

// mt19937_64 keyed by (seed, stream_id) through std::seed_seq, whose mixing
// is fixed by the standard; normals come from Boost's ziggurat, which unlike
// std::normal_distribution is the same code on every platform.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t bits() { return engine_(); }

    // uniform on the open interval (0, 1)
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53; }

    double normal() { return normal_(engine_); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_;
};

// Work is always split over this many streams, so results do not depend on
// the number of threads.
inline constexpr int kStreams = 16;

inline int thread_cap() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("ANNULUS_MODULI_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) n = std::min(n, v);
    }
    return n;
}

// Calls fn(s) for s = 0 .. n_tasks-1 on up to thread_cap() threads.
template <class F>
void parallel_tasks(int n_tasks, F&& fn) {
    const int nt = std::min(thread_cap(), n_tasks);
    if (nt <= 1) {
        for (int s = 0; s < n_tasks; ++s) fn(s);
        return;
    }
    std::vector<std::exception_ptr> errors(n_tasks);
    std::vector<std::thread> pool;
    for (int w = 0; w < nt; ++w) {
        pool.emplace_back([&, w] {
            for (int s = w; s < n_tasks; s += nt) {
                try {
                    fn(s);
                } catch (...) {
                    errors[s] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Index range [begin, end) of items owned by stream s when n items are split
// into kStreams contiguous blocks.
inline std::pair<std::size_t, std::size_t> stream_block(std::size_t n, int s) {
    const std::size_t b = n * static_cast<std::size_t>(s) / kStreams;
    const std::size_t e = n * static_cast<std::size_t>(s + 1) / kStreams;
    return {b, e};
}

}  // namespace annulus_moduli
