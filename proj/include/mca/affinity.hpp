#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mca/embedding.hpp"
#include "mca/ensemble.hpp"
#include "mca/predictor_glm.hpp"
#include "mca/predictor_grbf.hpp"

namespace mca {

enum class PredictorKind { glm, grbf };

const char *predictor_name(PredictorKind kind);

struct PredictorConfig {
    PredictorKind kind = PredictorKind::glm;
    std::size_t embed_dim = 3;
    std::size_t theiler = 0; // GLM: exclude |t - t_n| <= theiler
    GrbfConfig grbf;
    std::uint64_t seed = 1;
    int threads = 0; // 0: MCA_THREADS env, else hardware
};

// Directed cross-prediction skills: values[i*n+j] is the skill of series i
// predicting series j. Diagonal fixed at 0; not symmetric in general.
struct AffinityMatrix {
    std::size_t n = 0;
    std::vector<double> values;
    PredictorKind kind = PredictorKind::glm;
    PredictorConfig params;

    double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
    double &at(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

struct ComputeStats {
    double stage1_seconds = 0.0;
    double stage2_seconds = 0.0;
};

// One per-series bundle of precomputed expensive artifacts.
struct PredictorState {
    PredictorKind kind = PredictorKind::glm;
    GlmState glm;
    GrbfState grbf;
};

// Seed of the library/training subset for one (fraction, repetition) cell.
// It is shared by every series in the cell, so all states of one repetition
// draw the same time indices; the affinity engine is repetition 0.
std::uint64_t subset_seed(const PredictorConfig &cfg, std::uint32_t repetition,
                          double fraction);

// Expensive stage for one series. `fraction` is the GLM neighbor-library
// fraction or the GRBF training fraction; plain affinity uses 1.0 for GLM
// and cfg.grbf.train_fraction for GRBF.
PredictorState build_predictor_state(const EmbeddingSet &x,
                                     const PredictorConfig &cfg,
                                     double fraction, std::uint64_t seed);

// Cheap stage for one ordered pair.
double predict_skill(const PredictorState &state,
                     std::span<const double> targets);

// Skill matrix over a subset of series (global indices, sorted unique).
// Runs exactly |nodes| expensive constructions and |nodes|*(|nodes|-1)
// cheap evaluations.
AffinityMatrix pairwise_skills(const Ensemble &e,
                               std::span<const std::size_t> nodes,
                               const PredictorConfig &cfg, double fraction,
                               std::uint32_t repetition,
                               ComputeStats *stats = nullptr);

// Full N x N matrix for the whole ensemble.
AffinityMatrix compute_affinity(const Ensemble &e, const PredictorConfig &cfg,
                                ComputeStats *stats = nullptr);

struct RegionMatrix {
    std::vector<std::string> names;
    std::size_t r = 0;
    std::vector<double> values; // r x r

    double at(std::size_t a, std::size_t b) const { return values[a * r + b]; }
    double &at(std::size_t a, std::size_t b) { return values[a * r + b]; }
};

// Mean of A[i][j] over i in region a, j in region b, skipping i == j.
// Works on any square matrix whose indices the masks refer to.
RegionMatrix block_average(const std::vector<double> &values, std::size_t n,
                           const std::vector<RegionMask> &regions);
RegionMatrix block_average(const AffinityMatrix &a,
                           const std::vector<RegionMask> &regions);

} // namespace mca
