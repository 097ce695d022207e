#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mca {

// Overlapping d-dimensional segments x(t) = <s[t], ..., s[t+d-1]> of one
// series, t = 0..L-d-1. Stored as a copy of the source samples; dimension j
// of the vector set is the contiguous slice starting at offset j, which is
// the layout the distance kernels consume.
struct EmbeddingSet {
    std::vector<double> samples;
    std::size_t d = 0;

    std::size_t count() const { return samples.size() - d; }
    const double *dim(std::size_t j) const { return samples.data() + j; }
    double at(std::size_t t, std::size_t j) const { return samples[t + j]; }
};

EmbeddingSet embed(std::span<const double> s, std::size_t d);

// Targets paired with embed(): y(t) = s[t+d], t = 0..L-d-1.
std::vector<double> targets(std::span<const double> s, std::size_t d);

} // namespace mca
