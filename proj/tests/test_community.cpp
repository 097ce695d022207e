#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "mca/community.hpp"
#include "mca/rng.hpp"

using mca::AffinityMatrix;
using mca::Graph;

namespace {

AffinityMatrix matrix_of(std::size_t n, const std::vector<double> &values)
{
    AffinityMatrix a;
    a.n = n;
    a.values = values;
    return a;
}

Graph random_graph(std::size_t n, mca::Rng &rng, double density = 0.5)
{
    std::vector<double> w(n * n, 0.0);
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = i + 1; j < n; j++) {
            if (rng.uniform01() < density) {
                const double v = 0.1 + rng.uniform01();
                w[i * n + j] = v;
                w[j * n + i] = v;
            }
        }
    }
    // Guarantee positive total weight.
    if (std::accumulate(w.begin(), w.end(), 0.0) == 0.0) {
        w[1] = w[n] = 1.0;
    }
    return Graph::from_dense(w, n);
}

} // namespace

TEST_CASE("modularity: one community scores zero")
{
    mca::Rng rng(1);
    const Graph g = random_graph(9, rng);
    const std::vector<std::uint32_t> one(9, 0);
    CHECK(std::abs(mca::modularity(g, one)) <= 1e-12);
}

TEST_CASE("modularity: two disconnected equal components give 0.5")
{
    // Two separate unit edges.
    std::vector<double> w(16, 0.0);
    w[0 * 4 + 1] = w[1 * 4 + 0] = 1.0;
    w[2 * 4 + 3] = w[3 * 4 + 2] = 1.0;
    const Graph g = Graph::from_dense(w, 4);
    const std::vector<std::uint32_t> two{0, 0, 1, 1};
    CHECK(mca::modularity(g, two) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("modularity: singletons equal minus the degree sum of squares")
{
    mca::Rng rng(2);
    const Graph g = random_graph(8, rng);
    std::vector<std::uint32_t> singles(8);
    std::iota(singles.begin(), singles.end(), 0U);
    double expected = 0.0;
    for (std::size_t i = 0; i < 8; i++) {
        expected -= (g.degree[i] / g.two_m) * (g.degree[i] / g.two_m);
    }
    CHECK(mca::modularity(g, singles) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("modularity is invariant under uniform weight scaling")
{
    mca::Rng rng(3);
    std::vector<double> w(49, 0.0);
    for (std::size_t i = 0; i < 7; i++) {
        for (std::size_t j = i + 1; j < 7; j++) {
            const double v = rng.uniform01();
            w[i * 7 + j] = v;
            w[j * 7 + i] = v;
        }
    }
    std::vector<double> w4 = w;
    for (double &v : w4) {
        v *= 4.0;
    }
    const Graph g1 = Graph::from_dense(w, 7);
    const Graph g2 = Graph::from_dense(w4, 7);
    const std::vector<std::uint32_t> part{0, 1, 0, 2, 1, 2, 0};
    CHECK(std::abs(mca::modularity(g1, part) - mca::modularity(g2, part)) <=
          1e-10);
}

TEST_CASE("delta_q equals the from-scratch Q difference on random graphs")
{
    mca::Rng rng(4);
    for (int trial = 0; trial < 100; trial++) {
        const std::size_t n = 4 + rng.bounded(9); // up to 12 nodes
        const Graph g = random_graph(n, rng, 0.6);

        // Random partition, then isolate one node into its own community.
        std::vector<std::uint32_t> part(n);
        const std::uint32_t n_comm = 1 + static_cast<std::uint32_t>(
                                             rng.bounded(3));
        for (auto &c : part) {
            c = static_cast<std::uint32_t>(rng.bounded(n_comm));
        }
        const auto node = static_cast<std::uint32_t>(rng.bounded(n));
        part[node] = n_comm; // isolated
        const auto target = static_cast<std::uint32_t>(rng.bounded(n_comm));

        const double before = mca::modularity(g, part);
        const double dq = mca::delta_q(g, part, node, target);
        std::vector<std::uint32_t> merged = part;
        merged[node] = target;
        const double after = mca::modularity(g, merged);
        CHECK(std::abs(dq - (after - before)) <= 1e-10);
    }
}

TEST_CASE("delta_q with no links to the community is the pure penalty")
{
    // Path 0-1  2-3: node 0 has no links to community {2,3}.
    std::vector<double> w(16, 0.0);
    w[0 * 4 + 1] = w[1 * 4 + 0] = 2.0;
    w[2 * 4 + 3] = w[3 * 4 + 2] = 1.0;
    const Graph g = Graph::from_dense(w, 4);
    const std::vector<std::uint32_t> part{2, 3, 0, 0};
    const double dq = mca::delta_q(g, part, 0, 0);
    const double sigma_tot = g.degree[2] + g.degree[3];
    const double expected =
        -2.0 * sigma_tot * g.degree[0] / (g.two_m * g.two_m);
    CHECK(dq == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("delta_q into an empty community matches the scratch recompute")
{
    mca::Rng rng(5);
    const Graph g = random_graph(6, rng);
    // Everyone in community 0 except the isolated node 2; community 3 empty.
    std::vector<std::uint32_t> part{0, 0, 1, 0, 0, 0};
    const double before = mca::modularity(g, part);
    const double dq = mca::delta_q(g, part, 2, 3);
    std::vector<std::uint32_t> merged = part;
    merged[2] = 3;
    const double after = mca::modularity(g, merged);
    CHECK(std::abs(dq - (after - before)) <= 1e-12);
}

TEST_CASE("louvain recovers two planted cliques")
{
    const std::size_t half = 10;
    const std::size_t n = 2 * half;
    std::vector<double> w(n * n, 0.0);
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = i + 1; j < n; j++) {
            const bool same = (i < half) == (j < half);
            if (same) {
                w[i * n + j] = w[j * n + i] = 1.0;
            }
        }
    }
    w[0 * n + half] = w[half * n + 0] = 0.01; // weak bridge
    const Graph g = Graph::from_dense(w, n);
    const auto part = mca::louvain(g, 7);

    CHECK(part.n_communities == 2);
    for (std::size_t i = 1; i < half; i++) {
        CHECK(part.assignment[i] == part.assignment[0]);
    }
    for (std::size_t i = half + 1; i < n; i++) {
        CHECK(part.assignment[i] == part.assignment[half]);
    }
    CHECK(part.assignment[0] != part.assignment[half]);

    // At least as good as the planted structure.
    std::vector<std::uint32_t> planted(n, 0);
    for (std::size_t i = half; i < n; i++) {
        planted[i] = 1;
    }
    CHECK(part.q >= mca::modularity(g, planted) - 1e-12);
}

TEST_CASE("louvain on a structureless equal-weight graph keeps Q >= 0")
{
    const std::size_t n = 8;
    std::vector<double> w(n * n, 0.0);
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = 0; j < n; j++) {
            if (i != j) {
                w[i * n + j] = 1.0;
            }
        }
    }
    const Graph g = Graph::from_dense(w, n);
    const auto part = mca::louvain(g, 11);
    CHECK(part.q >= 0.0);

    // Never worse than all-singletons.
    std::vector<std::uint32_t> singles(n);
    std::iota(singles.begin(), singles.end(), 0U);
    CHECK(part.q >= mca::modularity(g, singles));
}

TEST_CASE("louvain merges a single edge into one community with Q = 0")
{
    std::vector<double> w(4, 0.0);
    w[0 * 2 + 1] = w[1 * 2 + 0] = 0.7;
    const Graph g = Graph::from_dense(w, 2);
    const auto part = mca::louvain(g, 1);
    CHECK(part.n_communities == 1);
    CHECK(part.q == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("louvain modularity is non-decreasing across hierarchy levels")
{
    mca::Rng rng(6);
    const Graph g = random_graph(30, rng, 0.25);
    const auto part = mca::louvain(g, 13);
    double last = -1.0;
    for (const auto &level : part.levels) {
        const double q = mca::modularity(g, level);
        CHECK(q >= last - 1e-12);
        last = q;
    }
    CHECK(part.q >= mca::modularity(
                        g, std::vector<std::uint32_t>(
                               g.n, 0)) - 1e-12); // trivially >= 0 = Q(one)
}

TEST_CASE("louvain is deterministic for a fixed seed")
{
    mca::Rng rng(7);
    const Graph g = random_graph(25, rng, 0.3);
    const auto a = mca::louvain(g, 99);
    const auto b = mca::louvain(g, 99);
    CHECK(a.assignment == b.assignment);
    CHECK(a.q == b.q);
}

TEST_CASE("louvain beats singletons and keeps ids contiguous (random graphs)")
{
    mca::Rng rng(14);
    for (int trial = 0; trial < 15; trial++) {
        const std::size_t n = 6 + rng.bounded(20);
        const Graph g = random_graph(n, rng, 0.3);
        const auto part = mca::louvain(
            g, static_cast<std::uint64_t>(trial));

        std::vector<std::uint32_t> singles(n);
        std::iota(singles.begin(), singles.end(), 0U);
        CHECK(part.q >= mca::modularity(g, singles) - 1e-12);
        CHECK(part.q >= -1.0);
        CHECK(part.q <= 1.0);

        // Ids are contiguous from 0: every id below the count occurs.
        std::vector<char> seen(part.n_communities, 0);
        for (const auto c : part.assignment) {
            REQUIRE(c < part.n_communities);
            seen[c] = 1;
        }
        for (const char s : seen) {
            CHECK(s == 1);
        }
    }
}

TEST_CASE("sparsify_mutual_knn: k = N-1 keeps every positive edge")
{
    const std::size_t n = 5;
    std::vector<double> v(n * n, 0.0);
    mca::Rng rng(8);
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = 0; j < n; j++) {
            if (i != j) {
                v[i * n + j] = 0.1 + rng.uniform01();
            }
        }
    }
    const auto directed = mca::mutual_knn_directed(matrix_of(n, v), n - 1);
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = 0; j < n; j++) {
            if (i != j) {
                CHECK(directed[i * n + j] == v[i * n + j]);
            }
        }
    }
}

TEST_CASE("sparsify_mutual_knn: k = 1 keeps only mutual best pairs")
{
    // 0's best is 1, but 1's best is 2 (and vice versa): edge (0,1) dies,
    // (1,2) survives.
    std::vector<double> v{
        0.0, 0.9, 0.1, //
        0.2, 0.0, 0.8, //
        0.1, 0.7, 0.0, //
    };
    const auto directed = mca::mutual_knn_directed(matrix_of(3, v), 1);
    CHECK(directed[0 * 3 + 1] == 0.0);
    CHECK(directed[1 * 3 + 0] == 0.0);
    CHECK(directed[1 * 3 + 2] == 0.8);
    CHECK(directed[2 * 3 + 1] == 0.7);
}

TEST_CASE("sparsify_mutual_knn clamps negative columns into isolation")
{
    std::vector<double> v{
        0.0,  0.5,  -0.4, //
        0.5,  0.0,  -0.2, //
        -0.3, -0.1, 0.0,  //
    };
    const auto directed = mca::mutual_knn_directed(matrix_of(3, v), 2);
    // Node 2's incident entries are all negative, so it keeps weight 0.
    for (std::size_t j = 0; j < 3; j++) {
        CHECK(directed[2 * 3 + j] == 0.0);
        CHECK(directed[j * 3 + 2] == 0.0);
    }
    CHECK(directed[0 * 3 + 1] == 0.5);
}

TEST_CASE("sparsify_mutual_knn bounds the directed entry count by N*k")
{
    mca::Rng rng(9);
    const std::size_t n = 40;
    std::vector<double> v(n * n);
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = 0; j < n; j++) {
            v[i * n + j] = i == j ? 0.0 : rng.uniform01();
        }
    }
    for (const std::size_t k : {1UL, 3UL, 8UL}) {
        const auto directed = mca::mutual_knn_directed(matrix_of(n, v), k);
        std::size_t nonzero = 0;
        for (const double w : directed) {
            if (w != 0.0) {
                nonzero++;
            }
        }
        CHECK(nonzero <= n * k);
    }
    CHECK_THROWS_AS(mca::mutual_knn_directed(matrix_of(n, v), 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(mca::mutual_knn_directed(matrix_of(n, v), n),
                    std::invalid_argument);
}

TEST_CASE("raw-row mode keeps edges but swaps the null-model degrees")
{
    mca::Rng rng(12);
    const std::size_t n = 12;
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = 0; j < n; j++) {
            if (i != j) {
                v[i * n + j] = rng.uniform01();
            }
        }
    }
    const auto a = matrix_of(n, v);
    const Graph sym = mca::sparsify_mutual_knn(a, 4, true);
    const Graph raw = mca::sparsify_mutual_knn(a, 4, false);

    // Identical undirected edge structure.
    REQUIRE(sym.n == raw.n);
    for (std::size_t i = 0; i < n; i++) {
        REQUIRE(sym.adj[i].size() == raw.adj[i].size());
        for (std::size_t e = 0; e < sym.adj[i].size(); e++) {
            CHECK(sym.adj[i][e] == raw.adj[i][e]);
        }
    }
    // Same total weight, possibly different per-node degrees.
    CHECK(sym.two_m == doctest::Approx(raw.two_m).epsilon(1e-12));
    bool any_diff = false;
    for (std::size_t i = 0; i < n; i++) {
        if (std::abs(sym.degree[i] - raw.degree[i]) > 1e-12) {
            any_diff = true;
        }
    }
    CHECK(any_diff);

    // Louvain still produces a valid partition in raw-row mode.
    const auto part = mca::louvain(raw, 5);
    CHECK(part.assignment.size() == n);
    CHECK(std::isfinite(part.q));
}

TEST_CASE("default_knn_k is about a fifth of the nodes")
{
    CHECK(mca::default_knn_k(500) == 100);
    CHECK(mca::default_knn_k(90) == 18);
    CHECK(mca::default_knn_k(3) == 1);
    CHECK(mca::default_knn_k(2) == 1);
}

TEST_CASE("dice coefficient cases")
{
    const std::vector<std::size_t> a{1, 2, 3, 4};
    CHECK(mca::dice(a, a) == 1.0);
    CHECK(mca::dice(a, std::vector<std::size_t>{7, 8}) == 0.0);
    // |a| = 4, |b| = 6, |intersection| = 3 -> 2*3/10.
    CHECK(mca::dice(a, std::vector<std::size_t>{2, 3, 4, 5, 6, 7}) ==
          doctest::Approx(0.6).epsilon(1e-15));
    CHECK(mca::dice(std::vector<std::size_t>{}, std::vector<std::size_t>{}) ==
          0.0);
}

TEST_CASE("merge_to_maximize_dice matches exhaustive search on small cases")
{
    mca::Rng rng(10);
    for (int trial = 0; trial < 30; trial++) {
        const std::size_t n = 18;
        const std::uint32_t n_clusters = 5;
        mca::Partition p;
        p.assignment.resize(n);
        for (auto &c : p.assignment) {
            c = static_cast<std::uint32_t>(rng.bounded(n_clusters));
        }
        mca::RegionMask truth;
        truth.name = "t";
        for (std::size_t i = 0; i < n; i++) {
            if (rng.uniform01() < 0.4) {
                truth.members.push_back(i);
            }
        }
        if (truth.members.empty()) {
            truth.members.push_back(0);
        }

        const auto res = mca::merge_to_maximize_dice(p, truth);

        // Exhaustive subset search over all 2^5 - 1 cluster unions.
        double best = -1.0;
        for (std::uint32_t mask = 1; mask < (1U << n_clusters); mask++) {
            std::vector<std::size_t> u;
            for (std::size_t i = 0; i < n; i++) {
                if (mask & (1U << p.assignment[i])) {
                    u.push_back(i);
                }
            }
            best = std::max(best, mca::dice(u, truth.members));
        }
        // Greedy is a heuristic: never better than the optimum, and never
        // worse than the best single cluster.
        CHECK(res.dice_value <= best + 1e-12);
        double best_single = -1.0;
        for (std::uint32_t c = 0; c < n_clusters; c++) {
            std::vector<std::size_t> u;
            for (std::size_t i = 0; i < n; i++) {
                if (p.assignment[i] == c) {
                    u.push_back(i);
                }
            }
            best_single = std::max(best_single, mca::dice(u, truth.members));
        }
        CHECK(res.dice_value >= best_single - 1e-12);
    }
}

TEST_CASE("merge_to_maximize_dice exact-union and single-cluster cases")
{
    mca::Partition p;
    p.assignment = {0, 0, 1, 1, 2, 2, 3, 3};

    // Truth equals cluster 1 exactly.
    mca::RegionMask t1{"t1", {2, 3}};
    const auto r1 = mca::merge_to_maximize_dice(p, t1);
    CHECK(r1.dice_value == 1.0);
    CHECK(r1.clusters == std::vector<std::uint32_t>{1});
    CHECK(r1.members == std::vector<std::size_t>{2, 3});

    // Truth equals clusters 2 and 3 together.
    mca::RegionMask t23{"t23", {4, 5, 6, 7}};
    const auto r23 = mca::merge_to_maximize_dice(p, t23);
    CHECK(r23.dice_value == 1.0);
    std::vector<std::uint32_t> sorted = r23.clusters;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::uint32_t>{2, 3});

    // Trace dice values are strictly increasing.
    for (std::size_t i = 1; i < r23.trace.size(); i++) {
        CHECK(r23.trace[i].dice_after > r23.trace[i - 1].dice_after);
    }
}
