#include <stdexcept>
#include <string>

#include "mca/embedding.hpp"

namespace mca {

namespace {

void check_dim(std::size_t len, std::size_t d)
{
    // At least two vectors; the predictors impose their own stronger
    // neighbor-count requirements on top.
    if (d < 1 || len < d + 2) {
        throw std::invalid_argument(
            "embed: dimension d=" + std::to_string(d) +
            " out of range for series length " + std::to_string(len) +
            " (need 1 <= d <= L-2)");
    }
}

} // namespace

EmbeddingSet embed(std::span<const double> s, std::size_t d)
{
    check_dim(s.size(), d);
    EmbeddingSet set;
    set.samples.assign(s.begin(), s.end());
    set.d = d;
    return set;
}

std::vector<double> targets(std::span<const double> s, std::size_t d)
{
    check_dim(s.size(), d);
    return std::vector<double>(s.begin() + static_cast<std::ptrdiff_t>(d),
                               s.end());
}

} // namespace mca
