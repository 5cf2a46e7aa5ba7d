#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace tabgbm {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
///
/// Work items must be independent and each must write only to its own output
/// slot; under that contract results are identical for any job count. jobs=1
/// (the default everywhere) runs inline.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    if (n == 0) return;
    jobs = std::max(1u, jobs);
    if (jobs == 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace tabgbm
