#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mca/causality.hpp"

namespace mca::svg {

struct CurveSeries {
    std::string label;
    std::vector<DirectionSummary> points; // one per fraction
};

// Cross-prediction curves over the fraction axis: a median polyline per
// series, p25/p75 whisker pairs per point, and an asterisk above fractions
// whose direction test is significant.
void render_ccm_curves(const std::vector<double> &fractions,
                       const std::vector<CurveSeries> &curves,
                       const std::filesystem::path &out);

// Heatmap with a signed diverging scale centered at 0 (midpoint #f7f7f7).
// Works for square affinity matrices and single-row influence strips.
void render_heatmap(const std::vector<double> &values, std::size_t rows,
                    std::size_t cols, const std::filesystem::path &out,
                    const std::string &title = "");

} // namespace mca::svg
