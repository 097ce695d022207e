#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mca/errors.hpp"

namespace mca {

struct GridCoord {
    int row = 0;
    int col = 0;
};

// A bundle of N equally long time series sampled at a fixed period, with
// optional pixel-grid coordinates and region labels.
struct Ensemble {
    std::vector<std::vector<double>> series; // N rows of length L
    double dt = 0.5;                         // sampling period, seconds
    std::optional<std::vector<GridCoord>> grid;
    int grid_w = 0;
    int grid_h = 0;
    std::vector<std::string> labels; // empty or size N

    std::size_t count() const { return series.size(); }
    std::size_t length() const { return series.empty() ? 0 : series[0].size(); }

    // Throws std::invalid_argument when a structural invariant is broken.
    void validate() const;
};

struct RegionMask {
    std::string name;
    std::vector<std::size_t> members; // unique, sorted, each < N
};

// Removes the first n samples of every series.
Ensemble drop_initial(const Ensemble &e, std::size_t n);

// Subtracts the least-squares line over t = 0..L-1.
std::vector<double> detrend(std::span<const double> s);

// Ideal Fourier mask: keeps bins whose frequency k/(L*dt) lies in
// [f_lo, f_hi], zeroes everything else (including DC when f_lo > 0).
std::vector<double> bandpass(std::span<const double> s, double f_lo,
                             double f_hi, double dt);

// Zero mean, unit population standard deviation.
std::vector<double> znormalize(std::span<const double> s);

// Gaussian smoothing on the pixel grid, kernel truncated at 3*sigma and
// renormalized over pixels present in the mask.
Ensemble smooth_spatial(const Ensemble &e, double sigma);

// Product-moment correlation, clamped to [-1, 1].
// Throws DegenerateSeriesError when either input is constant.
double pearson(std::span<const double> a, std::span<const double> b);

// Same, but reports the degenerate case as nullopt instead of throwing.
std::optional<double> try_pearson(std::span<const double> a,
                                  std::span<const double> b);

struct PreprocessConfig {
    std::size_t drop = 0;
    bool detrend = true;
    std::optional<double> band_lo; // both set -> bandpass applied
    std::optional<double> band_hi;
    bool normalize = true;
};

// drop_initial -> detrend -> bandpass -> znormalize, per series.
Ensemble preprocess(const Ensemble &e, const PreprocessConfig &cfg);

} // namespace mca
