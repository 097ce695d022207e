#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mca/ensemble.hpp"
#include "mca/instrument.hpp"
#include "mca/kernels.hpp"
#include "mca/predictor_glm.hpp"

namespace mca {

std::vector<double> glm_weights(std::span<const double> dists)
{
    const std::size_t k = dists.size();
    std::vector<double> w(k, 0.0);
    if (k == 0) {
        return w;
    }
    if (dists[0] == 0.0) {
        // Analytic limit of the exponential weights: mass splits evenly
        // over the exact matches.
        std::size_t zeros = 0;
        while (zeros < k && dists[zeros] == 0.0) {
            zeros++;
        }
        for (std::size_t i = 0; i < zeros; i++) {
            w[i] = 1.0 / static_cast<double>(zeros);
        }
        return w;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < k; i++) {
        w[i] = std::exp(-dists[i] / dists[0]);
        total += w[i];
    }
    for (double &v : w) {
        v /= total;
    }
    return w;
}

GlmState build_glm_state(const EmbeddingSet &x,
                         std::span<const std::size_t> library,
                         std::size_t theiler)
{
    const std::size_t d = x.d;
    const std::size_t k = d + 1;
    const std::size_t n = x.count();
    if (library.size() < d + 2) {
        throw std::invalid_argument(
            "build_glm_state: library of " + std::to_string(library.size()) +
            " vectors cannot supply d+1=" + std::to_string(k) +
            " neighbors after self-exclusion");
    }
    if (!std::is_sorted(library.begin(), library.end())) {
        throw std::invalid_argument(
            "build_glm_state: library indices must be sorted ascending");
    }
    if (library.back() >= n) {
        throw std::invalid_argument(
            "build_glm_state: library index out of range");
    }
    instrument::counters().predictor_states++;

    GlmState state;
    state.d = d;
    state.n_queries = n;
    state.neighbor_times.resize(n * k);
    state.weights.resize(n * k);

    // Library vectors gathered once into a compact dimension-major block,
    // so each query is one vectorized sweep of |library| distances.
    const std::size_t nl = library.size();
    std::vector<double> lib_block(d * nl);
    std::vector<const double *> lib_dims(d);
    for (std::size_t j = 0; j < d; j++) {
        double *col = lib_block.data() + j * nl;
        for (std::size_t c = 0; c < nl; c++) {
            col[c] = x.at(library[c], j);
        }
        lib_dims[j] = col;
    }

    std::vector<double> lib_dist(nl);
    std::vector<double> query(d);
    std::vector<double> best_dist(k);
    std::vector<std::uint32_t> best_time(k);

    for (std::size_t q = 0; q < n; q++) {
        for (std::size_t j = 0; j < d; j++) {
            query[j] = x.at(q, j);
        }
        kernels::dist_sq(lib_dims.data(), d, query.data(), nl,
                         lib_dist.data());
        instrument::counters().distance_evals += nl;

        // Bounded insertion keeps the k best; scanning in ascending time
        // order plus strict comparison yields the smaller-time tie-break.
        std::size_t filled = 0;
        for (std::size_t c = 0; c < nl; c++) {
            const std::size_t cand = library[c];
            if (cand == q) {
                continue;
            }
            const std::size_t gap = cand > q ? cand - q : q - cand;
            if (theiler > 0 && gap <= theiler) {
                continue;
            }
            const double dist = lib_dist[c];
            if (filled == k && dist >= best_dist[k - 1]) {
                continue;
            }
            std::size_t pos = filled < k ? filled : k - 1;
            while (pos > 0 && dist < best_dist[pos - 1]) {
                best_dist[pos] = best_dist[pos - 1];
                best_time[pos] = best_time[pos - 1];
                pos--;
            }
            best_dist[pos] = dist;
            best_time[pos] = static_cast<std::uint32_t>(cand);
            if (filled < k) {
                filled++;
            }
        }
        if (filled < k) {
            throw std::invalid_argument(
                "build_glm_state: query " + std::to_string(q) + " has only " +
                std::to_string(filled) + " neighbor candidates (need " +
                std::to_string(k) + "); widen the library or shrink the "
                "Theiler window");
        }

        // Weights expect Euclidean distances, not squared.
        for (std::size_t i = 0; i < k; i++) {
            best_dist[i] = std::sqrt(best_dist[i]);
        }
        const std::vector<double> w = glm_weights(best_dist);
        for (std::size_t i = 0; i < k; i++) {
            state.neighbor_times[q * k + i] = best_time[i];
            state.weights[q * k + i] = w[i];
        }
    }
    return state;
}

Prediction glm_predict(const GlmState &state, std::span<const double> targets)
{
    if (targets.size() != state.n_queries) {
        throw std::invalid_argument(
            "glm_predict: target count mismatch (expected " +
            std::to_string(state.n_queries) + ", got " +
            std::to_string(targets.size()) + ")");
    }
    instrument::counters().pair_predictions++;

    const std::size_t k = state.k();
    Prediction p;
    p.estimate.resize(state.n_queries);
    for (std::size_t q = 0; q < state.n_queries; q++) {
        double acc = 0.0;
        for (std::size_t i = 0; i < k; i++) {
            acc += state.weights[q * k + i] *
                   targets[state.neighbor_times[q * k + i]];
        }
        p.estimate[q] = acc;
    }
    p.skill = try_pearson(p.estimate, targets).value_or(0.0);
    return p;
}

} // namespace mca
