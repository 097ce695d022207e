#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mca/ensemble.hpp"
#include "mca/instrument.hpp"
#include "mca/kernels.hpp"
#include "mca/predictor_grbf.hpp"
#include "mca/rng.hpp"

namespace mca {

namespace {

double sq_dist(const double *a, const double *b, std::size_t dim)
{
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; j++) {
        const double diff = a[j] - b[j];
        acc += diff * diff;
    }
    return acc;
}

} // namespace

FcmResult fuzzy_cmeans(const double *points, std::size_t n, std::size_t dim,
                       std::size_t k, double fuzzifier, double tol,
                       std::size_t max_iter, std::uint64_t seed)
{
    if (k < 1 || k > n) {
        throw std::invalid_argument("fuzzy_cmeans: need 1 <= k <= n");
    }
    if (fuzzifier <= 1.0 || tol <= 0.0) {
        throw std::invalid_argument("fuzzy_cmeans: need fuzzifier > 1, tol > 0");
    }
    instrument::counters().fcm_runs++;

    FcmResult res;
    res.k = k;
    res.dim = dim;
    res.memberships.assign(n * k, 0.0);
    res.prototypes.resize(k * dim);

    // Initial centroids: k distinct points, seeded.
    Rng rng(seed);
    const std::vector<std::size_t> init = rng.sample_indices(n, k);
    for (std::size_t c = 0; c < k; c++) {
        std::copy_n(points + init[c] * dim, dim,
                    res.prototypes.begin() + static_cast<std::ptrdiff_t>(c * dim));
    }

    const double exponent = 2.0 / (fuzzifier - 1.0);
    std::vector<double> dist2(k);
    std::vector<double> new_proto(k * dim);
    std::vector<double> mass(k);

    for (std::size_t iter = 0; iter < max_iter; iter++) {
        // Membership update.
        double objective = 0.0;
        for (std::size_t i = 0; i < n; i++) {
            const double *p = points + i * dim;
            std::size_t zeros = 0;
            for (std::size_t c = 0; c < k; c++) {
                dist2[c] = sq_dist(p, res.prototypes.data() + c * dim, dim);
                if (dist2[c] == 0.0) {
                    zeros++;
                }
            }
            double *u = res.memberships.data() + i * k;
            if (zeros > 0) {
                // Coincident with one or more prototypes: all mass there.
                for (std::size_t c = 0; c < k; c++) {
                    u[c] = dist2[c] == 0.0
                               ? 1.0 / static_cast<double>(zeros)
                               : 0.0;
                }
                continue;
            }
            double total = 0.0;
            for (std::size_t c = 0; c < k; c++) {
                u[c] = std::pow(1.0 / dist2[c], exponent / 2.0);
                total += u[c];
            }
            for (std::size_t c = 0; c < k; c++) {
                u[c] /= total;
                objective += std::pow(u[c], fuzzifier) * dist2[c];
            }
        }

        // Centroid update.
        std::fill(new_proto.begin(), new_proto.end(), 0.0);
        std::fill(mass.begin(), mass.end(), 0.0);
        for (std::size_t i = 0; i < n; i++) {
            const double *p = points + i * dim;
            const double *u = res.memberships.data() + i * k;
            for (std::size_t c = 0; c < k; c++) {
                const double um = std::pow(u[c], fuzzifier);
                mass[c] += um;
                for (std::size_t j = 0; j < dim; j++) {
                    new_proto[c * dim + j] += um * p[j];
                }
            }
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; c++) {
            if (mass[c] == 0.0) {
                continue; // orphaned prototype stays put
            }
            double move2 = 0.0;
            for (std::size_t j = 0; j < dim; j++) {
                const double v = new_proto[c * dim + j] / mass[c];
                const double delta = v - res.prototypes[c * dim + j];
                move2 += delta * delta;
                res.prototypes[c * dim + j] = v;
            }
            shift = std::max(shift, std::sqrt(move2));
        }

        res.iterations = iter + 1;
        res.final_shift = shift;
        res.objective_trace.push_back(objective);
        if (shift <= tol) {
            break;
        }
    }
    return res;
}

std::vector<double> grbf_activations(const double *points, std::size_t n,
                                     std::size_t dim, const double *protos,
                                     std::size_t k, double rho)
{
    if (rho <= 0.0 || k < 1) {
        throw std::invalid_argument("grbf_activations: need rho > 0, k >= 1");
    }
    std::vector<double> a(n * k);
    const double inv2r2 = 1.0 / (2.0 * rho * rho);
    for (std::size_t i = 0; i < n; i++) {
        const double *p = points + i * dim;
        double total = 0.0;
        double *row = a.data() + i * k;
        for (std::size_t c = 0; c < k; c++) {
            row[c] = std::exp(-sq_dist(p, protos + c * dim, dim) * inv2r2);
            total += row[c];
        }
        // A query far from every prototype underflows the whole row;
        // uniform weights keep the row-sum invariant intact.
        if (total <= 0.0 || !std::isfinite(total)) {
            for (std::size_t c = 0; c < k; c++) {
                row[c] = 1.0 / static_cast<double>(k);
            }
            continue;
        }
        for (std::size_t c = 0; c < k; c++) {
            row[c] /= total;
        }
    }
    return a;
}

GrbfState build_grbf_state(const EmbeddingSet &x, const GrbfConfig &cfg,
                           std::uint64_t seed)
{
    const std::size_t n = x.count();
    const std::size_t d = x.d;
    if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0) {
        throw std::invalid_argument(
            "build_grbf_state: train fraction must lie in (0,1)");
    }
    const std::size_t n_train = static_cast<std::size_t>(
        std::llround(cfg.train_fraction * static_cast<double>(n)));

    Rng rng(mix_seed(seed, {0x67726266ULL})); // sub-stream for the split
    GrbfState state;
    state.d = d;
    state.train_idx = rng.sample_indices(n, n_train);
    state.test_idx.reserve(n - n_train);
    {
        std::size_t next = 0;
        for (std::size_t i = 0; i < n; i++) {
            if (next < state.train_idx.size() && state.train_idx[next] == i) {
                next++;
            } else {
                state.test_idx.push_back(i);
            }
        }
    }

    state.k = cfg.k != 0
                  ? cfg.k
                  : std::min<std::size_t>(
                        20, static_cast<std::size_t>(std::ceil(
                                std::sqrt(static_cast<double>(n_train)))));
    if (state.k < 2) {
        state.k = 2;
    }
    if (state.train_idx.size() < state.k + 1 || state.test_idx.size() < 3) {
        throw std::invalid_argument(
            "build_grbf_state: split too small (|Tr|=" +
            std::to_string(state.train_idx.size()) +
            ", |Te|=" + std::to_string(state.test_idx.size()) +
            ", k=" + std::to_string(state.k) + ")");
    }

    // Gather the split into dense row-major blocks.
    const auto gather = [&](const std::vector<std::size_t> &idx) {
        std::vector<double> block(idx.size() * d);
        for (std::size_t r = 0; r < idx.size(); r++) {
            for (std::size_t j = 0; j < d; j++) {
                block[r * d + j] = x.at(idx[r], j);
            }
        }
        return block;
    };
    const std::vector<double> train_pts = gather(state.train_idx);
    const std::vector<double> test_pts = gather(state.test_idx);

    const FcmResult fcm = fuzzy_cmeans(
        train_pts.data(), state.train_idx.size(), d, state.k, cfg.fuzzifier,
        cfg.fcm_tol, cfg.fcm_max_iter, mix_seed(seed, {0x66636dULL}));
    state.prototypes = fcm.prototypes;

    if (cfg.rho > 0.0) {
        state.rho = cfg.rho;
    } else {
        // Mean distance from each prototype to its nearest other prototype.
        double total = 0.0;
        for (std::size_t c = 0; c < state.k; c++) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t o = 0; o < state.k; o++) {
                if (o == c) {
                    continue;
                }
                best = std::min(best,
                                sq_dist(state.prototypes.data() + c * d,
                                        state.prototypes.data() + o * d, d));
            }
            total += std::sqrt(best);
        }
        state.rho = total / static_cast<double>(state.k);
        if (state.rho <= 0.0) {
            throw std::invalid_argument(
                "build_grbf_state: degenerate prototypes (rho rule gave 0); "
                "is the series constant?");
        }
    }

    state.a_train =
        grbf_activations(train_pts.data(), state.train_idx.size(), d,
                         state.prototypes.data(), state.k, state.rho);
    state.a_test = grbf_activations(test_pts.data(), state.test_idx.size(), d,
                                    state.prototypes.data(), state.k,
                                    state.rho);
    state.solver =
        QrFactor(state.a_train.data(), state.train_idx.size(), state.k);
    instrument::counters().predictor_states++;
    return state;
}

Prediction grbf_fit_predict(const GrbfState &state,
                            std::span<const double> targets)
{
    const std::size_t n_train = state.train_idx.size();
    const std::size_t n_test = state.test_idx.size();
    if (targets.size() < n_train + n_test) {
        throw std::invalid_argument("grbf_fit_predict: target count mismatch");
    }
    instrument::counters().pair_predictions++;

    std::vector<double> y_train(n_train);
    for (std::size_t r = 0; r < n_train; r++) {
        y_train[r] = targets[state.train_idx[r]];
    }
    const std::vector<double> s = state.solver.solve(y_train);

    Prediction p;
    p.estimate.resize(n_test);
    std::vector<double> y_test(n_test);
    for (std::size_t r = 0; r < n_test; r++) {
        p.estimate[r] =
            kernels::dot(state.a_test.data() + r * state.k, s.data(), state.k);
        y_test[r] = targets[state.test_idx[r]];
    }
    p.skill = try_pearson(p.estimate, y_test).value_or(0.0);
    return p;
}

} // namespace mca
