#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mca {

struct TestResult {
    double p = 1.0;
    double statistic = 0.0; // rank sum of the first sample
    bool testable = true;   // false when every value in both samples ties
};

// Two-sided Wilcoxon rank-sum, normal approximation with tie correction
// and continuity correction.
TestResult ranksum_test(std::span<const double> a, std::span<const double> b);

// Two-sided permutation test on the rank-sum statistic. Enumerates all
// assignments when that is cheap, otherwise draws n_perms seeded shuffles.
TestResult permutation_test(std::span<const double> a,
                            std::span<const double> b, std::size_t n_perms,
                            std::uint64_t seed);

// Linear-interpolation quantile (the "type 7" convention) of an unsorted
// sample; q in [0, 1].
double quantile(std::vector<double> sample, double q);

// Spearman rank correlation.
double spearman(std::span<const double> a, std::span<const double> b);

} // namespace mca
