#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mca/embedding.hpp"
#include "mca/linalg.hpp"
#include "mca/predictor_glm.hpp" // Prediction

namespace mca {

struct FcmResult {
    std::size_t k = 0;
    std::size_t dim = 0;
    std::vector<double> prototypes;  // k x dim
    std::vector<double> memberships; // n x k, rows sum to 1
    std::size_t iterations = 0;
    double final_shift = 0.0;
    std::vector<double> objective_trace; // one entry per iteration
};

// Alternating fuzzy C-means with seeded initial centroids drawn from the
// points. Deterministic for a given seed.
FcmResult fuzzy_cmeans(const double *points, std::size_t n, std::size_t dim,
                       std::size_t k, double fuzzifier, double tol,
                       std::size_t max_iter, std::uint64_t seed);

// Normalized Gaussian hidden-layer activations, one row per point.
// Rows whose kernels all underflow fall back to uniform 1/k.
std::vector<double> grbf_activations(const double *points, std::size_t n,
                                     std::size_t dim, const double *protos,
                                     std::size_t k, double rho);

struct GrbfConfig {
    double train_fraction = 0.6;
    std::size_t k = 0;      // 0: min(20, ceil(sqrt(|Tr|)))
    double rho = 0.0;       // 0: mean nearest-other-prototype distance
    double fuzzifier = 2.0;
    double fcm_tol = 1e-6;
    std::size_t fcm_max_iter = 300;
};

struct GrbfState {
    std::size_t d = 0;
    std::size_t k = 0;
    double rho = 0.0;
    std::vector<double> prototypes;     // k x d
    std::vector<std::size_t> train_idx; // sorted
    std::vector<std::size_t> test_idx;  // sorted complement
    std::vector<double> a_train;        // |Tr| x k
    std::vector<double> a_test;         // |Te| x k
    QrFactor solver;                    // factorization of a_train
};

// Expensive stage: split, cluster, activations, factorization. Depends
// only on the predictor series.
GrbfState build_grbf_state(const EmbeddingSet &x, const GrbfConfig &cfg,
                           std::uint64_t seed);

// Cheap stage: solve for output weights against the train targets, map the
// test activations, score with Pearson on the test split.
Prediction grbf_fit_predict(const GrbfState &state,
                            std::span<const double> targets);

} // namespace mca
