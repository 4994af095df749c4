#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace mcrkit {

/// Thread count resolution: explicit request > MCRKIT_THREADS > hardware.
inline unsigned resolve_threads(unsigned requested = 0) {
    if (const char* env = std::getenv("MCRKIT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Index-parallel loop. Each index writes only its own outputs, so results
/// are identical for any thread count.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const unsigned k = std::min<std::size_t>(threads, count);
    workers.reserve(k);
    for (unsigned t = 0; t < k; ++t) {
        workers.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& w : workers) w.join();
}

} // namespace mcrkit
