#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mca/embedding.hpp"

namespace mca {

struct Prediction {
    std::vector<double> estimate;
    double skill = 0.0; // Pearson of estimate vs truth; 0 when degenerate
};

// Per-query neighbor tables and weights. Construction is the expensive
// stage: it depends only on the predictor series, never on a target.
struct GlmState {
    std::size_t d = 0;
    std::size_t n_queries = 0;
    std::vector<std::uint32_t> neighbor_times; // n_queries x (d+1)
    std::vector<double> weights;               // n_queries x (d+1), rows sum 1

    std::size_t k() const { return d + 1; }
};

// w_n = exp(-dist_n/dist_1) normalized; dists must be sorted ascending.
// When dist_1 == 0 the weights are uniform over the zero-distance entries.
std::vector<double> glm_weights(std::span<const double> dists);

// Finds, for every embedding vector, the d+1 nearest library vectors by
// Euclidean distance. The query's own index is always excluded; a Theiler
// window > 0 additionally excludes |t - t_n| <= theiler. Ties break toward
// the smaller time index.
GlmState build_glm_state(const EmbeddingSet &x,
                         std::span<const std::size_t> library,
                         std::size_t theiler = 0);

// Cheap stage: weighted averages of the neighbors' targets plus a Pearson
// score over all queries. No distance computation happens here.
Prediction glm_predict(const GlmState &state, std::span<const double> targets);

} // namespace mca
