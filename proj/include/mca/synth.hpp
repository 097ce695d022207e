#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mca/ensemble.hpp"

namespace mca {

// Unidirectionally (or bi-/un-) coupled logistic maps:
//   X(t+1) = X(t) (r_x - r_x X(t) - beta_xy Y(t))
//   Y(t+1) = Y(t) (r_y - r_y Y(t) - beta_yx X(t))
// beta_yx couples X into Y's update, so beta_yx > 0 means X drives Y.
struct LogisticSpec {
    std::size_t length = 1000;
    double dt = 0.5;
    double r_x = 3.8;
    double r_y = 3.5;
    double beta_xy = 0.0; // Y -> X coupling
    double beta_yx = 0.3; // X -> Y coupling
    std::size_t burn_in = 300;
    std::uint64_t seed = 1;
};

struct LogisticTruth {
    bool x_drives_y = false;
    bool y_drives_x = false;
};

std::pair<Ensemble, LogisticTruth> gen_coupled_logistic(const LogisticSpec &s);

// Planted-community ensemble: each community gets an independent
// band-limited latent signal; members are latent + sigma * white noise and
// then run through the standard preprocessing.
struct CommunitySpec {
    std::vector<std::size_t> sizes{30, 30, 30};
    std::size_t length = 488;
    double dt = 0.5;
    double noise_sigma = 0.5;
    double band_lo = 0.0083;
    double band_hi = 0.08;
    std::uint64_t seed = 1;
};

std::pair<Ensemble, std::vector<RegionMask>>
gen_community_ensemble(const CommunitySpec &s);

// Pure white-noise ensemble (negative control).
Ensemble gen_noise_ensemble(std::size_t n, std::size_t length, double dt,
                            std::uint64_t seed);

// Block stimulus: round(period_s/dt) samples of rest (0) then the same of
// task (1), repeated `cycles` times.
std::vector<double> stimulus_wave(double period_s, std::size_t cycles,
                                  double dt);

// Indices whose series correlate with the stimulus at or above threshold.
// Constant series are skipped. Lengths are aligned by truncation to the
// shorter of the two.
RegionMask ground_truth_mask(const Ensemble &e, std::span<const double> stim,
                             double threshold);

} // namespace mca
