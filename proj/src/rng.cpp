#include <algorithm>
#include <numeric>

#include "mca/rng.hpp"

namespace mca {

std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t k)
{
    if (k > n) {
        k = n;
    }
    // Partial Fisher-Yates: the first k slots end up holding the sample.
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; i++) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

} // namespace mca
