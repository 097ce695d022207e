#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mca/community.hpp"
#include "mca/rng.hpp"

namespace mca {

namespace {

void finish_degrees(Graph &g)
{
    g.two_m = 0.0;
    for (std::size_t i = 0; i < g.n; i++) {
        g.two_m += g.degree[i];
    }
    if (g.two_m <= 0.0) {
        throw std::invalid_argument("graph: total weight must be positive");
    }
}

std::vector<std::uint32_t> renumber(std::vector<std::uint32_t> labels)
{
    std::vector<std::uint32_t> map(labels.size(),
                                   std::numeric_limits<std::uint32_t>::max());
    std::uint32_t next = 0;
    for (auto &l : labels) {
        if (map[l] == std::numeric_limits<std::uint32_t>::max()) {
            map[l] = next++;
        }
        l = map[l];
    }
    return labels;
}

} // namespace

Graph Graph::from_dense(const std::vector<double> &values, std::size_t n,
                        bool row_degrees)
{
    Graph g;
    g.n = n;
    g.adj.resize(n);
    g.self_loop.assign(n, 0.0);
    g.degree.assign(n, 0.0);
    for (std::size_t i = 0; i < n; i++) {
        g.self_loop[i] = values[i * n + i];
        for (std::size_t j = i + 1; j < n; j++) {
            const double w = 0.5 * (values[i * n + j] + values[j * n + i]);
            if (w != 0.0) {
                g.adj[i].push_back({static_cast<std::uint32_t>(j), w});
                g.adj[j].push_back({static_cast<std::uint32_t>(i), w});
            }
        }
    }
    for (std::size_t i = 0; i < n; i++) {
        if (row_degrees) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; j++) {
                row += values[i * n + j];
            }
            g.degree[i] = row;
        } else {
            double k = g.self_loop[i];
            for (const auto &[j, w] : g.adj[i]) {
                k += w;
            }
            g.degree[i] = k;
        }
    }
    finish_degrees(g);
    return g;
}

std::size_t default_knn_k(std::size_t n)
{
    const auto k = static_cast<std::size_t>(
        std::llround(0.2 * static_cast<double>(n)));
    return std::max<std::size_t>(1, std::min(k, n - 1));
}

std::vector<double> mutual_knn_directed(const AffinityMatrix &a, std::size_t k)
{
    const std::size_t n = a.n;
    if (k < 1 || k >= n) {
        throw std::invalid_argument("mutual_knn: need 1 <= k < n");
    }

    // top[i] holds i's k best neighbors by affinity, ties toward smaller j.
    std::vector<std::vector<char>> in_top(n, std::vector<char>(n, 0));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; i++) {
        order.clear();
        for (std::size_t j = 0; j < n; j++) {
            if (j != i) {
                order.push_back(j);
            }
        }
        std::partial_sort(order.begin(),
                          order.begin() + static_cast<std::ptrdiff_t>(k),
                          order.end(), [&](std::size_t x, std::size_t y) {
                              const double ax = a.at(i, x);
                              const double ay = a.at(i, y);
                              if (ax != ay) {
                                  return ax > ay;
                              }
                              return x < y;
                          });
        for (std::size_t r = 0; r < k; r++) {
            in_top[i][order[r]] = 1;
        }
    }

    std::vector<double> directed(n * n, 0.0);
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = 0; j < n; j++) {
            if (i != j && in_top[i][j] && in_top[j][i]) {
                directed[i * n + j] = std::max(a.at(i, j), 0.0);
            }
        }
    }
    return directed;
}

Graph sparsify_mutual_knn(const AffinityMatrix &a, std::size_t k,
                          bool symmetrize)
{
    const std::vector<double> directed = mutual_knn_directed(a, k);
    return Graph::from_dense(directed, a.n, /*row_degrees=*/!symmetrize);
}

double modularity(const Graph &g, std::span<const std::uint32_t> assignment)
{
    if (g.n == 0 || g.two_m <= 0.0) {
        throw std::invalid_argument("modularity: empty graph");
    }
    if (assignment.size() != g.n) {
        throw std::invalid_argument("modularity: assignment size mismatch");
    }
    std::uint32_t n_comm = 0;
    for (const auto c : assignment) {
        n_comm = std::max(n_comm, c + 1);
    }
    std::vector<double> s_in(n_comm, 0.0);  // matrix-sum of internal weight
    std::vector<double> s_tot(n_comm, 0.0); // sum of member degrees
    for (std::size_t i = 0; i < g.n; i++) {
        const std::uint32_t c = assignment[i];
        s_tot[c] += g.degree[i];
        s_in[c] += g.self_loop[i];
        for (const auto &[j, w] : g.adj[i]) {
            if (assignment[j] == c) {
                s_in[c] += w;
            }
        }
    }
    double q = 0.0;
    for (std::uint32_t c = 0; c < n_comm; c++) {
        const double tot = s_tot[c] / g.two_m;
        q += s_in[c] / g.two_m - tot * tot;
    }
    return q;
}

double delta_q(const Graph &g, std::span<const std::uint32_t> assignment,
               std::uint32_t node, std::uint32_t community)
{
    for (std::size_t i = 0; i < g.n; i++) {
        if (i != node && assignment[i] == assignment[node]) {
            throw std::invalid_argument("delta_q: node is not isolated");
        }
    }
    double sigma_in = 0.0;
    double sigma_tot = 0.0;
    for (std::size_t i = 0; i < g.n; i++) {
        if (assignment[i] != community) {
            continue;
        }
        sigma_tot += g.degree[i];
        sigma_in += g.self_loop[i];
        for (const auto &[j, w] : g.adj[i]) {
            if (assignment[j] == community) {
                sigma_in += w;
            }
        }
    }
    double k_i_in = 0.0;
    for (const auto &[j, w] : g.adj[node]) {
        if (assignment[j] == community) {
            k_i_in += 2.0 * w; // both directions of the matrix sum
        }
    }
    const double k_i = g.degree[node];
    const double two_m = g.two_m;

    const double after = (sigma_in + k_i_in) / two_m -
                         ((sigma_tot + k_i) / two_m) *
                             ((sigma_tot + k_i) / two_m);
    const double before = sigma_in / two_m -
                          (sigma_tot / two_m) * (sigma_tot / two_m) -
                          (k_i / two_m) * (k_i / two_m);
    return after - before;
}

namespace {

// One Louvain pass over `g`: local moves to the best neighboring community
// until no move improves Q. Returns the (renumbered) assignment and whether
// any move happened.
struct PassResult {
    std::vector<std::uint32_t> assignment;
    bool moved = false;
};

PassResult louvain_pass(const Graph &g, Rng &rng)
{
    const std::size_t n = g.n;
    const double two_m = g.two_m;
    std::vector<std::uint32_t> comm(n);
    std::iota(comm.begin(), comm.end(), 0U);
    std::vector<double> s_tot(g.degree.begin(), g.degree.end());

    std::vector<std::uint32_t> visit(n);
    std::iota(visit.begin(), visit.end(), 0U);
    rng.shuffle(visit);

    // Scratch for neighbor-community link weights (doubled, matrix sum).
    std::vector<double> link(n, -1.0);
    std::vector<std::uint32_t> touched;
    touched.reserve(64);

    PassResult res;
    bool moved_any = false;
    for (;;) {
        std::size_t moves = 0;
        for (const std::uint32_t node : visit) {
            const std::uint32_t old_comm = comm[node];

            touched.clear();
            link[old_comm] = 0.0;
            touched.push_back(old_comm);
            for (const auto &[j, w] : g.adj[node]) {
                const std::uint32_t c = comm[j];
                if (link[c] < 0.0) {
                    link[c] = 0.0;
                    touched.push_back(c);
                }
                link[c] += 2.0 * w;
            }

            // Remove the node, then insert into the best candidate. A move
            // must strictly beat staying; equal gains keep the node where
            // it is, and equal gains between two new homes pick the lower
            // community id.
            s_tot[old_comm] -= g.degree[node];
            const double k_i = g.degree[node];

            double best_gain = link[old_comm] / two_m -
                               2.0 * s_tot[old_comm] * k_i / (two_m * two_m);
            std::uint32_t best_comm = old_comm;
            for (const std::uint32_t c : touched) {
                if (c == old_comm) {
                    continue;
                }
                const double gain =
                    link[c] / two_m - 2.0 * s_tot[c] * k_i / (two_m * two_m);
                if (gain > best_gain || (gain == best_gain &&
                                         best_comm != old_comm &&
                                         c < best_comm)) {
                    best_gain = gain;
                    best_comm = c;
                }
            }
            comm[node] = best_comm;
            s_tot[best_comm] += k_i;
            if (best_comm != old_comm) {
                moves++;
            }

            for (const std::uint32_t c : touched) {
                link[c] = -1.0;
            }
        }
        if (moves == 0) {
            break;
        }
        moved_any = true;
    }
    res.assignment = renumber(std::move(comm));
    res.moved = moved_any;
    return res;
}

Graph aggregate(const Graph &g, std::span<const std::uint32_t> assignment,
                std::uint32_t n_comm)
{
    Graph out;
    out.n = n_comm;
    out.adj.resize(n_comm);
    out.self_loop.assign(n_comm, 0.0);
    out.degree.assign(n_comm, 0.0);

    std::vector<std::vector<double>> acc(n_comm,
                                         std::vector<double>(n_comm, 0.0));
    for (std::size_t i = 0; i < g.n; i++) {
        const std::uint32_t ci = assignment[i];
        out.self_loop[ci] += g.self_loop[i];
        out.degree[ci] += g.degree[i];
        for (const auto &[j, w] : g.adj[i]) {
            const std::uint32_t cj = assignment[j];
            if (cj == ci) {
                out.self_loop[ci] += w; // both directions arrive here
            } else {
                acc[ci][cj] += w;
            }
        }
    }
    // self_loop now holds sum(self) + 2 * sum(internal edges): exactly the
    // matrix-sum convention for the coarse diagonal.
    for (std::uint32_t c = 0; c < n_comm; c++) {
        for (std::uint32_t d = 0; d < n_comm; d++) {
            if (d != c && acc[c][d] != 0.0) {
                out.adj[c].push_back({d, acc[c][d]});
            }
        }
    }
    finish_degrees(out);
    return out;
}

} // namespace

Partition louvain(const Graph &g, std::uint64_t seed)
{
    if (g.n == 0 || g.two_m <= 0.0) {
        throw std::invalid_argument("louvain: empty graph");
    }
    Rng rng(mix_seed(seed, {stream::LOUVAIN}));

    Partition part;
    std::vector<std::uint32_t> projected(g.n);
    std::iota(projected.begin(), projected.end(), 0U);

    Graph current = g;
    double last_q = modularity(g, projected);
    constexpr double kMinGain = 1e-9;

    for (;;) {
        const PassResult pass = louvain_pass(current, rng);
        if (!pass.moved) {
            break;
        }
        std::uint32_t n_comm = 0;
        for (const auto c : pass.assignment) {
            n_comm = std::max(n_comm, c + 1);
        }
        // Project onto original nodes and record the level.
        for (auto &p : projected) {
            p = pass.assignment[p];
        }
        part.levels.push_back(projected);

        const double q = modularity(g, projected);
        if (q - last_q < kMinGain) {
            break;
        }
        last_q = q;
        if (n_comm == current.n) {
            break; // no further coarsening possible
        }
        current = aggregate(current, pass.assignment, n_comm);
    }

    if (part.levels.empty()) {
        part.levels.push_back(projected);
    }
    part.assignment = renumber(part.levels.back());
    std::uint32_t n_comm = 0;
    for (const auto c : part.assignment) {
        n_comm = std::max(n_comm, c + 1);
    }
    part.n_communities = n_comm;
    part.q = modularity(g, part.assignment);
    return part;
}

double dice(std::span<const std::size_t> a, std::span<const std::size_t> b)
{
    if (a.empty() && b.empty()) {
        return 0.0;
    }
    // Inputs are sorted unique index sets.
    std::size_t inter = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            inter++;
            i++;
            j++;
        } else if (a[i] < b[j]) {
            i++;
        } else {
            j++;
        }
    }
    return 2.0 * static_cast<double>(inter) /
           static_cast<double>(a.size() + b.size());
}

MergeResult merge_to_maximize_dice(const Partition &p, const RegionMask &truth)
{
    if (truth.members.empty()) {
        throw std::invalid_argument("merge_to_maximize_dice: empty truth mask");
    }
    std::uint32_t n_comm = 0;
    for (const auto c : p.assignment) {
        n_comm = std::max(n_comm, c + 1);
    }
    std::vector<std::vector<std::size_t>> clusters(n_comm);
    for (std::size_t i = 0; i < p.assignment.size(); i++) {
        clusters[p.assignment[i]].push_back(i);
    }

    MergeResult res;
    std::vector<char> used(n_comm, 0);
    std::vector<std::size_t> current;

    for (;;) {
        double best = -1.0;
        std::uint32_t best_c = 0;
        std::vector<std::size_t> best_union;
        for (std::uint32_t c = 0; c < n_comm; c++) {
            if (used[c] || clusters[c].empty()) {
                continue;
            }
            std::vector<std::size_t> u;
            u.reserve(current.size() + clusters[c].size());
            std::merge(current.begin(), current.end(), clusters[c].begin(),
                       clusters[c].end(), std::back_inserter(u));
            const double d = dice(u, truth.members);
            if (d > best) {
                best = d;
                best_c = c;
                best_union = std::move(u);
            }
        }
        if (best < 0.0) {
            break; // no clusters left
        }
        if (!res.trace.empty() && best <= res.dice_value) {
            break; // no further improvement
        }
        used[best_c] = 1;
        current = std::move(best_union);
        res.clusters.push_back(best_c);
        res.dice_value = best;
        res.trace.push_back({best_c, best});
    }
    res.members = std::move(current);
    return res;
}

} // namespace mca
