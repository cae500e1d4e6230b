#pragma once

#include <atomic>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace cutflow {

// f(0..count-1) on up to `jobs` threads; results in index order, first failure (by index) rethrown
template <class F>
auto parallel_map(int count, int jobs, F&& f) -> std::vector<decltype(f(0))> {
    using R = decltype(f(0));
    std::vector<std::optional<R>> slot(count);
    std::vector<std::exception_ptr> err(count);
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i; (i = next.fetch_add(1)) < count;) {
            try {
                slot[i].emplace(f(i));
            } catch (...) {
                err[i] = std::current_exception();
            }
        }
    };
    const int nt = std::max(1, std::min(jobs, count));
    if (nt == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < nt; ++t)
            pool.emplace_back(work);
    }
    std::vector<R> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        if (err[i])
            std::rethrow_exception(err[i]);
        out.push_back(std::move(*slot[i]));
    }
    return out;
}

} // namespace cutflow
