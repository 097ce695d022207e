#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mca/affinity.hpp"

namespace mca {

// Undirected weighted graph in the adjacency-matrix convention: every
// off-diagonal edge is stored in both directions, self_loop[i] is the
// diagonal entry W_ii, and degree[i] = sum_j W_ij unless overridden by the
// raw-row interpretation. two_m = sum of all degrees.
struct Graph {
    std::size_t n = 0;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
    std::vector<double> self_loop;
    std::vector<double> degree;
    double two_m = 0.0;

    // Symmetric part of a dense matrix; when row_degrees is set the null
    // model keeps the single-sided row sums of the original matrix.
    static Graph from_dense(const std::vector<double> &values, std::size_t n,
                            bool row_degrees = false);
};

// Directed matrix after mutual-kNN retention: entry (i,j) keeps
// max(A[i][j], 0) when j is in i's top-k and i is in j's top-k, else 0.
std::vector<double> mutual_knn_directed(const AffinityMatrix &a,
                                        std::size_t k);

// Mutual-kNN retention followed by graph construction. With symmetrize
// (default) edge weights are (w_ij + w_ji)/2 and degrees follow; without,
// edges are the same but the null model uses the directed row sums.
Graph sparsify_mutual_knn(const AffinityMatrix &a, std::size_t k,
                          bool symmetrize = true);

// Empirical default for k: about 20% of the nodes.
std::size_t default_knn_k(std::size_t n);

struct Partition {
    std::vector<std::uint32_t> assignment; // per original node, contiguous ids
    std::vector<std::vector<std::uint32_t>> levels; // per pass, projected
    double q = 0.0;
    std::size_t n_communities = 0;
};

double modularity(const Graph &g, std::span<const std::uint32_t> assignment);

// Gain of merging the currently isolated node into `community`, evaluated
// with the bracketed two-term expression over (sigma_in, sigma_tot, k_i,
// k_i_in, m). Requires that `node` sit alone in its own community.
double delta_q(const Graph &g, std::span<const std::uint32_t> assignment,
               std::uint32_t node, std::uint32_t community);

Partition louvain(const Graph &g, std::uint64_t seed);

double dice(std::span<const std::size_t> a, std::span<const std::size_t> b);

struct MergeStep {
    std::uint32_t cluster = 0;
    double dice_after = 0.0;
};

struct MergeResult {
    std::vector<std::uint32_t> clusters;   // merged cluster ids, in order
    std::vector<std::size_t> members;      // union of their nodes, sorted
    double dice_value = 0.0;
    std::vector<MergeStep> trace;
};

// Greedy cluster merging: start from the single best-Dice cluster, keep
// adding the cluster whose union raises Dice the most, stop at no gain.
MergeResult merge_to_maximize_dice(const Partition &p, const RegionMask &truth);

} // namespace mca
