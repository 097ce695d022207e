#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mca/rng.hpp"
#include "mca/synth.hpp"

namespace mca {

std::pair<Ensemble, LogisticTruth> gen_coupled_logistic(const LogisticSpec &s)
{
    if (s.length < 64) {
        throw std::invalid_argument("gen_coupled_logistic: length must be >= 64");
    }
    Ensemble e;
    e.dt = s.dt;
    e.labels = {"X", "Y"};

    for (int attempt = 0; attempt < 10; attempt++) {
        Rng rng(mix_seed(s.seed, {stream::SYNTH, 0x6c6f67ULL,
                                  static_cast<std::uint64_t>(attempt)}));
        double x = 0.2 + 0.6 * rng.uniform01();
        double y = 0.2 + 0.6 * rng.uniform01();
        std::vector<double> xs;
        std::vector<double> ys;
        xs.reserve(s.length);
        ys.reserve(s.length);
        bool diverged = false;
        for (std::size_t t = 0; t < s.burn_in + s.length; t++) {
            const double nx = x * (s.r_x - s.r_x * x - s.beta_xy * y);
            const double ny = y * (s.r_y - s.r_y * y - s.beta_yx * x);
            x = nx;
            y = ny;
            if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0)) {
                diverged = true;
                break;
            }
            if (t >= s.burn_in) {
                xs.push_back(x);
                ys.push_back(y);
            }
        }
        if (!diverged) {
            e.series = {std::move(xs), std::move(ys)};
            return {std::move(e),
                    LogisticTruth{s.beta_yx != 0.0, s.beta_xy != 0.0}};
        }
    }
    throw std::invalid_argument(
        "gen_coupled_logistic: trajectory diverges for these parameters "
        "(tried 10 initial conditions)");
}

std::pair<Ensemble, std::vector<RegionMask>>
gen_community_ensemble(const CommunitySpec &s)
{
    if (s.sizes.size() < 2) {
        throw std::invalid_argument(
            "gen_community_ensemble: need at least 2 communities");
    }
    for (const std::size_t sz : s.sizes) {
        if (sz < 3) {
            throw std::invalid_argument(
                "gen_community_ensemble: each community needs >= 3 series");
        }
    }
    if (s.length < 64) {
        throw std::invalid_argument("gen_community_ensemble: length >= 64");
    }

    Ensemble e;
    e.dt = s.dt;
    std::vector<RegionMask> truth;

    std::size_t next_index = 0;
    for (std::size_t c = 0; c < s.sizes.size(); c++) {
        // Independent band-limited latent per community.
        Rng lat_rng(mix_seed(s.seed, {stream::SYNTH, 0x636f6dULL, c}));
        std::vector<double> latent(s.length);
        for (double &v : latent) {
            v = lat_rng.normal();
        }
        latent = znormalize(bandpass(latent, s.band_lo, s.band_hi, s.dt));

        RegionMask mask;
        mask.name = "C" + std::to_string(c);
        for (std::size_t m = 0; m < s.sizes[c]; m++) {
            Rng noise_rng(
                mix_seed(s.seed, {stream::SYNTH, 0x6d656dULL, c, m}));
            std::vector<double> member(s.length);
            for (std::size_t t = 0; t < s.length; t++) {
                member[t] = latent[t] + s.noise_sigma * noise_rng.normal();
            }
            e.series.push_back(std::move(member));
            mask.members.push_back(next_index++);
        }
        truth.push_back(std::move(mask));
    }

    PreprocessConfig pc;
    pc.band_lo = s.band_lo;
    pc.band_hi = s.band_hi;
    e = preprocess(e, pc);
    return {std::move(e), std::move(truth)};
}

Ensemble gen_noise_ensemble(std::size_t n, std::size_t length, double dt,
                            std::uint64_t seed)
{
    if (n < 1 || length < 8) {
        throw std::invalid_argument("gen_noise_ensemble: need n >= 1, L >= 8");
    }
    Ensemble e;
    e.dt = dt;
    e.series.resize(n);
    for (std::size_t i = 0; i < n; i++) {
        Rng rng(mix_seed(seed, {stream::SYNTH, 0x6e6f69ULL, i}));
        e.series[i].resize(length);
        for (double &v : e.series[i]) {
            v = rng.normal();
        }
    }
    return e;
}

std::vector<double> stimulus_wave(double period_s, std::size_t cycles,
                                  double dt)
{
    if (period_s <= dt) {
        throw std::invalid_argument("stimulus_wave: period must exceed dt");
    }
    if (cycles < 1) {
        throw std::invalid_argument("stimulus_wave: need at least one cycle");
    }
    const std::size_t block = static_cast<std::size_t>(
        std::llround(period_s / dt));
    std::vector<double> wave;
    wave.reserve(2 * block * cycles);
    for (std::size_t c = 0; c < cycles; c++) {
        wave.insert(wave.end(), block, 0.0);
        wave.insert(wave.end(), block, 1.0);
    }
    return wave;
}

RegionMask ground_truth_mask(const Ensemble &e, std::span<const double> stim,
                             double threshold)
{
    if (stim.size() < 2) {
        throw std::invalid_argument("ground_truth_mask: stimulus too short");
    }
    const std::size_t len = std::min(e.length(), stim.size());
    RegionMask mask;
    mask.name = "stimulus";
    const std::span<const double> stim_cut = stim.subspan(0, len);
    for (std::size_t i = 0; i < e.count(); i++) {
        const std::span<const double> s(e.series[i].data(), len);
        const auto r = try_pearson(s, stim_cut);
        if (!r.has_value()) {
            continue; // constant series carries no stimulus signal
        }
        if (*r >= threshold) {
            mask.members.push_back(i);
        }
    }
    return mask;
}

} // namespace mca
