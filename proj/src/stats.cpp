#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mca/ensemble.hpp"
#include "mca/rng.hpp"
#include "mca/stats.hpp"

namespace mca {

namespace {

// Midranks of the pooled sample plus the tie statistic sum(t^3 - t).
struct Ranked {
    std::vector<double> ranks; // pooled order: a then b
    double tie_term = 0.0;
    bool all_tied = false;
};

Ranked rank_pooled(std::span<const double> a, std::span<const double> b)
{
    const std::size_t n = a.size() + b.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto value = [&](std::size_t i) {
        return i < a.size() ? a[i] : b[i - a.size()];
    };
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t x, std::size_t y) { return value(x) < value(y); });

    Ranked r;
    r.ranks.resize(n);
    std::size_t i = 0;
    std::size_t distinct = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && value(idx[j]) == value(idx[i])) {
            j++;
        }
        const double mid = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; t++) {
            r.ranks[idx[t]] = mid;
        }
        const double ties = static_cast<double>(j - i);
        r.tie_term += ties * ties * ties - ties;
        distinct++;
        i = j;
    }
    r.all_tied = distinct == 1;
    return r;
}

double rank_sum_of_a(const Ranked &r, std::size_t na)
{
    double w = 0.0;
    for (std::size_t i = 0; i < na; i++) {
        w += r.ranks[i];
    }
    return w;
}

} // namespace

TestResult ranksum_test(std::span<const double> a, std::span<const double> b)
{
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("ranksum_test: need >= 2 values per side");
    }
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const double n = n1 + n2;

    const Ranked r = rank_pooled(a, b);
    TestResult res;
    res.statistic = rank_sum_of_a(r, a.size());
    if (r.all_tied) {
        res.p = 1.0;
        res.testable = false;
        return res;
    }

    const double mean = n1 * (n + 1.0) / 2.0;
    const double var =
        n1 * n2 / 12.0 * ((n + 1.0) - r.tie_term / (n * (n - 1.0)));
    if (var <= 0.0) {
        res.p = 1.0;
        res.testable = false;
        return res;
    }
    const double dev = res.statistic - mean;
    const double cc = dev > 0.0 ? 0.5 : (dev < 0.0 ? -0.5 : 0.0);
    const double z = (dev - cc) / std::sqrt(var);
    res.p = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
    return res;
}

TestResult permutation_test(std::span<const double> a,
                            std::span<const double> b, std::size_t n_perms,
                            std::uint64_t seed)
{
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument(
            "permutation_test: need >= 2 values per side");
    }
    const std::size_t na = a.size();
    const std::size_t n = na + b.size();

    const Ranked r = rank_pooled(a, b);
    TestResult res;
    res.statistic = rank_sum_of_a(r, na);
    if (r.all_tied) {
        res.p = 1.0;
        res.testable = false;
        return res;
    }
    const double mean =
        static_cast<double>(na) * static_cast<double>(n + 1) / 2.0;
    const double observed = std::abs(res.statistic - mean);

    // Exact enumeration when the number of assignments is small enough.
    double n_choose_k = 1.0;
    for (std::size_t i = 0; i < na; i++) {
        n_choose_k *= static_cast<double>(n - i) / static_cast<double>(i + 1);
    }
    const bool exact = n_choose_k <= 200000.0;

    std::size_t hits = 0;
    std::size_t total = 0;
    if (exact) {
        // All size-na index subsets in lexicographic order.
        std::vector<std::size_t> pick(na);
        std::iota(pick.begin(), pick.end(), std::size_t{0});
        const auto next_combination = [&]() -> bool {
            std::size_t i = na;
            while (i > 0) {
                i--;
                if (pick[i] != i + n - na) {
                    pick[i]++;
                    for (std::size_t j = i + 1; j < na; j++) {
                        pick[j] = pick[j - 1] + 1;
                    }
                    return true;
                }
            }
            return false;
        };
        do {
            double w = 0.0;
            for (const std::size_t i : pick) {
                w += r.ranks[i];
            }
            if (std::abs(w - mean) >= observed - 1e-12) {
                hits++;
            }
            total++;
        } while (next_combination());
        res.p = static_cast<double>(hits) / static_cast<double>(total);
        return res;
    }

    Rng rng(mix_seed(seed, {stream::PERMUTATION}));
    std::vector<double> pool = r.ranks;
    for (std::size_t it = 0; it < n_perms; it++) {
        rng.shuffle(pool);
        double w = 0.0;
        for (std::size_t i = 0; i < na; i++) {
            w += pool[i];
        }
        if (std::abs(w - mean) >= observed - 1e-12) {
            hits++;
        }
        total++;
    }
    res.p = static_cast<double>(hits + 1) / static_cast<double>(total + 1);
    return res;
}

double quantile(std::vector<double> sample, double q)
{
    if (sample.empty()) {
        throw std::invalid_argument("quantile: empty sample");
    }
    if (q < 0.0 || q > 1.0) {
        throw std::invalid_argument("quantile: q outside [0,1]");
    }
    std::sort(sample.begin(), sample.end());
    const double h = q * static_cast<double>(sample.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sample.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sample[lo] + frac * (sample[hi] - sample[lo]);
}

double spearman(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("spearman: need equal lengths >= 2");
    }
    const auto ranks_of = [](std::span<const double> v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
        std::vector<double> ranks(v.size());
        std::size_t i = 0;
        while (i < v.size()) {
            std::size_t j = i;
            while (j < v.size() && v[idx[j]] == v[idx[i]]) {
                j++;
            }
            const double mid = 0.5 * static_cast<double>(i + 1 + j);
            for (std::size_t t = i; t < j; t++) {
                ranks[idx[t]] = mid;
            }
            i = j;
        }
        return ranks;
    };
    const std::vector<double> ra = ranks_of(a);
    const std::vector<double> rb = ranks_of(b);
    return try_pearson(ra, rb).value_or(0.0);
}

} // namespace mca
