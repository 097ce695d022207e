#pragma once

#include <atomic>
#include <cstdint>

// Operation counters backing the cost-model assertions: the expensive stage
// runs exactly N times, the cheap stage N(N-1) times, and the cheap stage
// never computes distances, clusters, or factorizes.

namespace mca::instrument {

struct Counters {
    std::atomic<std::uint64_t> predictor_states{0};
    std::atomic<std::uint64_t> pair_predictions{0};
    std::atomic<std::uint64_t> distance_evals{0}; // individual point distances
    std::atomic<std::uint64_t> fcm_runs{0};
    std::atomic<std::uint64_t> lsq_factorizations{0};
};

Counters &counters();
void reset();

struct Snapshot {
    std::uint64_t predictor_states;
    std::uint64_t pair_predictions;
    std::uint64_t distance_evals;
    std::uint64_t fcm_runs;
    std::uint64_t lsq_factorizations;
};

Snapshot snapshot();

} // namespace mca::instrument
