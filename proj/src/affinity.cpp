#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mca/affinity.hpp"
#include "mca/parallel.hpp"
#include "mca/rng.hpp"

namespace mca {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_nodes(const Ensemble &e, std::span<const std::size_t> nodes)
{
    if (nodes.size() < 2) {
        throw std::invalid_argument("pairwise_skills: need at least 2 series");
    }
    for (std::size_t i = 0; i + 1 < nodes.size(); i++) {
        if (nodes[i] >= nodes[i + 1]) {
            throw std::invalid_argument(
                "pairwise_skills: node indices must be sorted and unique");
        }
    }
    if (nodes.back() >= e.count()) {
        throw std::invalid_argument("pairwise_skills: node index " +
                                    std::to_string(nodes.back()) +
                                    " out of range");
    }
    std::string constant;
    for (const std::size_t idx : nodes) {
        const auto &s = e.series[idx];
        const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
        if (*lo == *hi) {
            constant += constant.empty() ? "" : ", ";
            constant += std::to_string(idx);
        }
    }
    if (!constant.empty()) {
        throw DegenerateSeriesError(
            "pairwise_skills: constant series at indices [" + constant + "]");
    }
}

} // namespace

const char *predictor_name(PredictorKind kind)
{
    return kind == PredictorKind::glm ? "glm" : "grbf";
}

std::uint64_t subset_seed(const PredictorConfig &cfg, std::uint32_t repetition,
                          double fraction)
{
    std::uint64_t fraction_bits = 0;
    static_assert(sizeof(fraction_bits) == sizeof(fraction));
    std::memcpy(&fraction_bits, &fraction, sizeof(fraction));
    return mix_seed(cfg.seed, {stream::STATE, repetition, fraction_bits});
}

PredictorState build_predictor_state(const EmbeddingSet &x,
                                     const PredictorConfig &cfg,
                                     double fraction, std::uint64_t seed)
{
    PredictorState state;
    state.kind = cfg.kind;
    if (cfg.kind == PredictorKind::glm) {
        if (fraction <= 0.0 || fraction > 1.0) {
            throw std::invalid_argument(
                "build_predictor_state: library fraction must lie in (0,1]");
        }
        const std::size_t n = x.count();
        const std::size_t take = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(n)));
        if (take < x.d + 2) {
            throw std::invalid_argument(
                "build_predictor_state: fraction " + std::to_string(fraction) +
                " yields a library of " + std::to_string(take) +
                " vectors; need at least d+2=" + std::to_string(x.d + 2));
        }
        std::vector<std::size_t> library;
        if (take >= n) {
            library.resize(n);
            std::iota(library.begin(), library.end(), std::size_t{0});
        } else {
            Rng rng(seed);
            library = rng.sample_indices(n, take);
        }
        state.glm = build_glm_state(x, library, cfg.theiler);
    } else {
        GrbfConfig gc = cfg.grbf;
        gc.train_fraction = fraction;
        state.grbf = build_grbf_state(x, gc, seed);
    }
    return state;
}

double predict_skill(const PredictorState &state,
                     std::span<const double> targets)
{
    if (state.kind == PredictorKind::glm) {
        return glm_predict(state.glm, targets).skill;
    }
    return grbf_fit_predict(state.grbf, targets).skill;
}

AffinityMatrix pairwise_skills(const Ensemble &e,
                               std::span<const std::size_t> nodes,
                               const PredictorConfig &cfg, double fraction,
                               std::uint32_t repetition, ComputeStats *stats)
{
    check_nodes(e, nodes);
    const std::size_t m = nodes.size();
    const std::size_t d = cfg.embed_dim;

    // Embeddings and targets are shared read-only by both stages.
    std::vector<EmbeddingSet> embeds(m);
    std::vector<std::vector<double>> targs(m);
    for (std::size_t a = 0; a < m; a++) {
        embeds[a] = embed(e.series[nodes[a]], d);
        targs[a] = targets(e.series[nodes[a]], d);
    }

    // Stage 1: one expensive construction per series. All series of the
    // cell share one subset seed, so they draw the same time indices.
    const std::uint64_t seed = subset_seed(cfg, repetition, fraction);
    const auto t0 = Clock::now();
    std::vector<PredictorState> states(m);
    parallel_for(m, cfg.threads, [&](std::size_t a) {
        states[a] = build_predictor_state(embeds[a], cfg, fraction, seed);
    });
    const double stage1 = seconds_since(t0);

    // Stage 2: cheap evaluation of every ordered pair.
    AffinityMatrix out;
    out.n = m;
    out.values.assign(m * m, 0.0);
    out.kind = cfg.kind;
    out.params = cfg;
    const auto t1 = Clock::now();
    parallel_for(m, cfg.threads, [&](std::size_t a) {
        for (std::size_t b = 0; b < m; b++) {
            if (b == a) {
                continue;
            }
            out.values[a * m + b] = predict_skill(states[a], targs[b]);
        }
    });
    const double stage2 = seconds_since(t1);

    if (stats != nullptr) {
        stats->stage1_seconds = stage1;
        stats->stage2_seconds = stage2;
    }
    return out;
}

AffinityMatrix compute_affinity(const Ensemble &e, const PredictorConfig &cfg,
                                ComputeStats *stats)
{
    std::vector<std::size_t> all(e.count());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const double fraction = cfg.kind == PredictorKind::glm
                                ? 1.0
                                : cfg.grbf.train_fraction;
    return pairwise_skills(e, all, cfg, fraction, 0, stats);
}

RegionMatrix block_average(const std::vector<double> &values, std::size_t n,
                           const std::vector<RegionMask> &regions)
{
    if (regions.size() < 2) {
        throw std::invalid_argument("block_average: need at least 2 regions");
    }
    std::vector<char> owner(n, 0);
    for (const auto &reg : regions) {
        if (reg.members.empty()) {
            throw std::invalid_argument("block_average: empty region '" +
                                        reg.name + "'");
        }
        for (const std::size_t idx : reg.members) {
            if (idx >= n) {
                throw std::invalid_argument("block_average: index out of range");
            }
            if (owner[idx] != 0) {
                throw std::invalid_argument(
                    "block_average: regions overlap at index " +
                    std::to_string(idx));
            }
            owner[idx] = 1;
        }
    }

    RegionMatrix rm;
    rm.r = regions.size();
    rm.values.assign(rm.r * rm.r, 0.0);
    for (const auto &reg : regions) {
        rm.names.push_back(reg.name);
    }
    for (std::size_t a = 0; a < rm.r; a++) {
        for (std::size_t b = 0; b < rm.r; b++) {
            double acc = 0.0;
            std::size_t cnt = 0;
            for (const std::size_t i : regions[a].members) {
                for (const std::size_t j : regions[b].members) {
                    if (i == j) {
                        continue;
                    }
                    acc += values[i * n + j];
                    cnt++;
                }
            }
            rm.values[a * rm.r + b] = cnt > 0 ? acc / static_cast<double>(cnt)
                                              : 0.0;
        }
    }
    return rm;
}

RegionMatrix block_average(const AffinityMatrix &a,
                           const std::vector<RegionMask> &regions)
{
    return block_average(a.values, a.n, regions);
}

} // namespace mca
