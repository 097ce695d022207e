#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mca/affinity.hpp"
#include "mca/ensemble.hpp"

namespace mca {

enum class CcmTest { ranksum, permutation };

struct CcmConfig {
    std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    std::size_t repetitions = 20;
    PredictorConfig predictor;
    CcmTest test = CcmTest::ranksum;
    std::size_t permutations = 10000;
    double alpha = 0.05;
};

struct DirectionSummary {
    double median = 0.0;
    double p25 = 0.0;
    double p75 = 0.0;
    double pvalue = 1.0;
    bool significant = false;
    bool testable = false;
};

// Skills are stored over the sorted union of region members; entry (a, b)
// of a submatrix is the skill of node a predicting node b, in `nodes`
// order. Region-level samples apply block averaging per repetition.
struct CcmResult {
    std::vector<std::size_t> nodes;        // global series indices, sorted
    std::vector<RegionMask> regions;       // original masks
    std::vector<double> fractions;
    std::size_t repetitions = 0;

    // [fraction][repetition] -> m*m row-major submatrix
    std::vector<std::vector<std::vector<double>>> skills;
    // [fraction] -> m*m mean over repetitions
    std::vector<std::vector<double>> averaged;
    // [fraction][p*R+q][repetition] -> block-averaged region skill
    std::vector<std::vector<std::vector<double>>> region_samples;
    // [fraction][p*R+q] -> summary incl. direction test vs (q,p)
    std::vector<std::vector<DirectionSummary>> summaries;

    std::size_t n_regions() const { return regions.size(); }
    std::size_t node_count() const { return nodes.size(); }
};

CcmResult ccm_run(const Ensemble &e, const std::vector<RegionMask> &regions,
                  const CcmConfig &cfg);

// Per-fraction comparison of direction a->b against b->a.
std::vector<DirectionSummary> compare_directions(const CcmResult &res,
                                                 std::size_t region_a,
                                                 std::size_t region_b);

struct InfluenceMap {
    std::vector<std::size_t> nodes;     // global indices, region 1 then 2
    std::vector<std::string> region_of; // region name per node
    std::vector<double> scores;
};

// I_i = sum_j A[i][j] - sum_j A[j][i] over the counterpart region's nodes.
// `averaged` is an m*m matrix over `nodes`; both masks hold global indices.
InfluenceMap influence_scores(const std::vector<double> &averaged,
                              const std::vector<std::size_t> &nodes,
                              const RegionMask &region1,
                              const RegionMask &region2);

struct EdgeSummary {
    std::string region_a;
    std::string region_b;
    std::string direction; // "a->b", "b->a" or "symmetric"
    double p_at_max_fraction = 1.0;
};

struct GlobalCausality {
    // Region-level curves are res.summaries; this adds the edge table:
    // a direction is flagged when it is significant at no fewer than half
    // of the fractions >= 0.5, otherwise the pair reads symmetric.
    std::vector<EdgeSummary> edges;
};

GlobalCausality global_causality(const CcmResult &res);

} // namespace mca
