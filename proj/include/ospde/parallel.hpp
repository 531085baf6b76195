#pragma once

#include <cstddef>
#include <algorithm>
#include <exception>
#include <span>
#include <thread>
#include <vector>

namespace ospde {

/// Number of worker threads used by parallel_for. Defaults to 1.
void set_worker_count(std::size_t workers);
std::size_t worker_count();

/// Calls body(i) for i in [0, count) on static contiguous blocks. The first
/// exception thrown by any worker is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    const std::size_t workers = std::min(worker_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        threads.emplace_back([&, w, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

/// Pairwise (cascade) summation in index order; the result depends only on the input.
double pairwise_sum(std::span<const double> values);

}  // namespace ospde
