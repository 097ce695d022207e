#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

#include "mca/parallel.hpp"

namespace mca {

int resolve_threads(int requested)
{
    if (requested > 0) {
        return requested;
    }
    if (const char *env = std::getenv("MCA_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) {
            return v;
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)> &fn)
{
    const int workers =
        std::max(1, std::min<int>(resolve_threads(threads),
                                  static_cast<int>(std::max<std::size_t>(n, 1))));
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; i++) {
            fn(i);
        }
        return;
    }

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    const std::size_t chunk = (n + static_cast<std::size_t>(workers) - 1) /
                              static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; w++) {
        const std::size_t lo = static_cast<std::size_t>(w) * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back([&, lo, hi, w] {
            try {
                for (std::size_t i = lo; i < hi; i++) {
                    fn(i);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    for (auto &err : errors) {
        if (err) {
            std::rethrow_exception(err);
        }
    }
}

} // namespace mca
