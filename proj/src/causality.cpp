#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mca/causality.hpp"
#include "mca/rng.hpp"
#include "mca/stats.hpp"

namespace mca {

namespace {

std::vector<std::size_t>
sorted_union(const std::vector<RegionMask> &regions)
{
    std::vector<std::size_t> nodes;
    for (const auto &r : regions) {
        if (r.members.empty()) {
            throw std::invalid_argument("ccm: empty region '" + r.name + "'");
        }
        nodes.insert(nodes.end(), r.members.begin(), r.members.end());
    }
    std::sort(nodes.begin(), nodes.end());
    for (std::size_t i = 0; i + 1 < nodes.size(); i++) {
        if (nodes[i] == nodes[i + 1]) {
            throw std::invalid_argument(
                "ccm: regions overlap at series " + std::to_string(nodes[i]));
        }
    }
    return nodes;
}

// Masks remapped to positions inside the node union.
std::vector<RegionMask>
localize(const std::vector<RegionMask> &regions,
         const std::vector<std::size_t> &nodes)
{
    std::vector<RegionMask> local;
    for (const auto &r : regions) {
        RegionMask lm;
        lm.name = r.name;
        for (const std::size_t g : r.members) {
            const auto it = std::lower_bound(nodes.begin(), nodes.end(), g);
            lm.members.push_back(
                static_cast<std::size_t>(it - nodes.begin()));
        }
        std::sort(lm.members.begin(), lm.members.end());
        local.push_back(std::move(lm));
    }
    return local;
}

TestResult run_direction_test(const CcmConfig &cfg,
                              const std::vector<double> &fwd,
                              const std::vector<double> &rev,
                              std::uint64_t seed)
{
    if (cfg.test == CcmTest::permutation) {
        return permutation_test(fwd, rev, cfg.permutations, seed);
    }
    return ranksum_test(fwd, rev);
}

} // namespace

CcmResult ccm_run(const Ensemble &e, const std::vector<RegionMask> &regions,
                  const CcmConfig &cfg)
{
    if (regions.empty()) {
        throw std::invalid_argument("ccm: need at least one region");
    }
    if (cfg.repetitions < 1) {
        throw std::invalid_argument("ccm: repetitions must be >= 1");
    }
    if (cfg.fractions.empty()) {
        throw std::invalid_argument("ccm: no fractions given");
    }
    for (std::size_t i = 0; i < cfg.fractions.size(); i++) {
        const double f = cfg.fractions[i];
        if (f <= 0.0 || f > 1.0 ||
            (i > 0 && f <= cfg.fractions[i - 1])) {
            throw std::invalid_argument(
                "ccm: fractions must be strictly increasing within (0,1]");
        }
    }

    CcmResult res;
    res.nodes = sorted_union(regions);
    res.regions = regions;
    res.fractions = cfg.fractions;
    res.repetitions = cfg.repetitions;
    const std::size_t m = res.nodes.size();
    const std::size_t n_frac = cfg.fractions.size();
    const std::size_t n_reg = regions.size();
    const std::vector<RegionMask> local = localize(regions, res.nodes);

    // Up-front check that every fraction leaves a workable library.
    if (e.length() < cfg.predictor.embed_dim + 2) {
        throw std::invalid_argument(
            "ccm: series of length " + std::to_string(e.length()) +
            " cannot support embedding dimension " +
            std::to_string(cfg.predictor.embed_dim));
    }
    const std::size_t n_emb = e.length() - cfg.predictor.embed_dim;
    for (const double f : cfg.fractions) {
        const auto take = static_cast<std::size_t>(
            std::llround(f * static_cast<double>(n_emb)));
        if (take < cfg.predictor.embed_dim + 2) {
            throw std::invalid_argument(
                "ccm: fraction " + std::to_string(f) + " yields only " +
                std::to_string(take) + " library vectors (need d+2)");
        }
    }

    res.skills.resize(n_frac);
    res.averaged.resize(n_frac);
    res.region_samples.resize(n_frac);
    res.summaries.resize(n_frac);

    for (std::size_t fi = 0; fi < n_frac; fi++) {
        const double f = cfg.fractions[fi];
        res.skills[fi].resize(cfg.repetitions);
        for (std::size_t rep = 0; rep < cfg.repetitions; rep++) {
            AffinityMatrix sub =
                pairwise_skills(e, res.nodes, cfg.predictor, f,
                                static_cast<std::uint32_t>(rep));
            res.skills[fi][rep] = std::move(sub.values);
        }

        // Mean over repetitions, accumulated in repetition order.
        res.averaged[fi].assign(m * m, 0.0);
        for (std::size_t rep = 0; rep < cfg.repetitions; rep++) {
            const auto &s = res.skills[fi][rep];
            for (std::size_t idx = 0; idx < m * m; idx++) {
                res.averaged[fi][idx] += s[idx];
            }
        }
        for (double &v : res.averaged[fi]) {
            v /= static_cast<double>(cfg.repetitions);
        }

        // Region-level samples via block averaging per repetition.
        res.region_samples[fi].assign(n_reg * n_reg, {});
        for (auto &v : res.region_samples[fi]) {
            v.reserve(cfg.repetitions);
        }
        for (std::size_t rep = 0; rep < cfg.repetitions; rep++) {
            const RegionMatrix rm =
                block_average(res.skills[fi][rep], m, local);
            for (std::size_t p = 0; p < n_reg; p++) {
                for (std::size_t q = 0; q < n_reg; q++) {
                    res.region_samples[fi][p * n_reg + q].push_back(
                        rm.at(p, q));
                }
            }
        }

        // Summaries and direction tests.
        res.summaries[fi].assign(n_reg * n_reg, {});
        for (std::size_t p = 0; p < n_reg; p++) {
            for (std::size_t q = 0; q < n_reg; q++) {
                if (p == q) {
                    continue;
                }
                const auto &fwd = res.region_samples[fi][p * n_reg + q];
                const auto &rev = res.region_samples[fi][q * n_reg + p];
                DirectionSummary ds;
                ds.median = quantile(fwd, 0.5);
                ds.p25 = quantile(fwd, 0.25);
                ds.p75 = quantile(fwd, 0.75);
                if (cfg.repetitions >= 2) {
                    const TestResult tr = run_direction_test(
                        cfg, fwd, rev,
                        mix_seed(cfg.predictor.seed,
                                 {stream::PERMUTATION, fi, p, q}));
                    ds.pvalue = tr.p;
                    ds.testable = tr.testable;
                    ds.significant = tr.testable && tr.p < cfg.alpha;
                }
                res.summaries[fi][p * n_reg + q] = ds;
            }
        }
    }
    return res;
}

std::vector<DirectionSummary> compare_directions(const CcmResult &res,
                                                 std::size_t region_a,
                                                 std::size_t region_b)
{
    const std::size_t n_reg = res.n_regions();
    if (region_a >= n_reg || region_b >= n_reg || region_a == region_b) {
        throw std::invalid_argument("compare_directions: bad region pair");
    }
    std::vector<DirectionSummary> out;
    out.reserve(res.fractions.size());
    for (std::size_t fi = 0; fi < res.fractions.size(); fi++) {
        out.push_back(res.summaries[fi][region_a * n_reg + region_b]);
    }
    return out;
}

InfluenceMap influence_scores(const std::vector<double> &averaged,
                              const std::vector<std::size_t> &nodes,
                              const RegionMask &region1,
                              const RegionMask &region2)
{
    if (region1.members.empty() || region2.members.empty()) {
        throw std::invalid_argument("influence_scores: empty region");
    }
    const std::size_t m = nodes.size();
    const auto local_of = [&](std::size_t g) -> std::size_t {
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), g);
        if (it == nodes.end() || *it != g) {
            throw std::invalid_argument(
                "influence_scores: series " + std::to_string(g) +
                " is not part of the matrix");
        }
        return static_cast<std::size_t>(it - nodes.begin());
    };

    InfluenceMap map;
    const auto score_against = [&](const RegionMask &own,
                                   const RegionMask &other) {
        for (const std::size_t g : own.members) {
            const std::size_t i = local_of(g);
            double s = 0.0;
            for (const std::size_t h : other.members) {
                const std::size_t j = local_of(h);
                if (i == j) {
                    continue;
                }
                s += averaged[i * m + j] - averaged[j * m + i];
            }
            map.nodes.push_back(g);
            map.region_of.push_back(own.name);
            map.scores.push_back(s);
        }
    };
    score_against(region1, region2);
    score_against(region2, region1);
    return map;
}

GlobalCausality global_causality(const CcmResult &res)
{
    const std::size_t n_reg = res.n_regions();
    if (n_reg < 2) {
        throw std::invalid_argument("global_causality: need >= 2 regions");
    }
    std::vector<std::size_t> high;
    for (std::size_t fi = 0; fi < res.fractions.size(); fi++) {
        if (res.fractions[fi] >= 0.5) {
            high.push_back(fi);
        }
    }
    const std::size_t fi_max = res.fractions.size() - 1;

    GlobalCausality out;
    for (std::size_t p = 0; p < n_reg; p++) {
        for (std::size_t q = p + 1; q < n_reg; q++) {
            EdgeSummary edge;
            edge.region_a = res.regions[p].name;
            edge.region_b = res.regions[q].name;
            edge.p_at_max_fraction =
                res.summaries[fi_max][p * n_reg + q].pvalue;

            std::size_t sig = 0;
            for (const std::size_t fi : high) {
                if (res.summaries[fi][p * n_reg + q].significant) {
                    sig++;
                }
            }
            const bool asymmetric =
                !high.empty() && 2 * sig >= high.size();
            if (!asymmetric) {
                edge.direction = "symmetric";
            } else {
                const double med_pq =
                    res.summaries[fi_max][p * n_reg + q].median;
                const double med_qp =
                    res.summaries[fi_max][q * n_reg + p].median;
                edge.direction = med_pq >= med_qp ? "a->b" : "b->a";
            }
            out.edges.push_back(std::move(edge));
        }
    }
    return out;
}

} // namespace mca
