#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "mca/ensemble.hpp"
#include "mca/kernels.hpp"

namespace mca {

namespace {

constexpr double kPi = 3.14159265358979323846;

double series_mean(std::span<const double> s)
{
    return kernels::sum(s.data(), s.size()) / static_cast<double>(s.size());
}

} // namespace

void Ensemble::validate() const
{
    if (series.empty()) {
        throw std::invalid_argument("ensemble: no series");
    }
    const std::size_t len = series[0].size();
    if (len < 2) {
        throw std::invalid_argument("ensemble: series length must be >= 2");
    }
    for (std::size_t i = 0; i < series.size(); i++) {
        if (series[i].size() != len) {
            throw std::invalid_argument("ensemble: series " +
                                        std::to_string(i) +
                                        " has mismatched length");
        }
    }
    if (dt <= 0.0) {
        throw std::invalid_argument("ensemble: dt must be positive");
    }
    if (grid) {
        if (grid->size() != series.size()) {
            throw std::invalid_argument("ensemble: grid size != series count");
        }
        std::set<std::pair<int, int>> seen;
        for (const GridCoord &c : *grid) {
            if (c.row < 0 || c.row >= grid_h || c.col < 0 || c.col >= grid_w) {
                throw std::invalid_argument(
                    "ensemble: grid coordinate out of range");
            }
            if (!seen.insert({c.row, c.col}).second) {
                throw std::invalid_argument(
                    "ensemble: duplicate grid coordinate");
            }
        }
    }
    if (!labels.empty() && labels.size() != series.size()) {
        throw std::invalid_argument("ensemble: labels size != series count");
    }
}

Ensemble drop_initial(const Ensemble &e, std::size_t n)
{
    if (n >= e.length()) {
        throw std::invalid_argument("drop_initial: n (" + std::to_string(n) +
                                    ") >= series length (" +
                                    std::to_string(e.length()) + ")");
    }
    Ensemble out = e;
    for (auto &s : out.series) {
        s.erase(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
    }
    return out;
}

std::vector<double> detrend(std::span<const double> s)
{
    const std::size_t len = s.size();
    if (len < 2) {
        throw std::invalid_argument("detrend: series length must be >= 2");
    }
    const double n = static_cast<double>(len);
    const double t_mean = (n - 1.0) / 2.0;
    const double y_mean = series_mean(s);
    double sty = 0.0;
    double stt = 0.0;
    for (std::size_t t = 0; t < len; t++) {
        const double dt_ = static_cast<double>(t) - t_mean;
        sty += dt_ * (s[t] - y_mean);
        stt += dt_ * dt_;
    }
    const double slope = sty / stt;
    std::vector<double> out(len);
    for (std::size_t t = 0; t < len; t++) {
        out[t] = s[t] - (y_mean + slope * (static_cast<double>(t) - t_mean));
    }
    return out;
}

std::vector<double> bandpass(std::span<const double> s, double f_lo,
                             double f_hi, double dt)
{
    const std::size_t len = s.size();
    if (len < 2) {
        throw std::invalid_argument("bandpass: series length must be >= 2");
    }
    if (dt <= 0.0) {
        throw std::invalid_argument("bandpass: dt must be positive");
    }
    const double nyquist = 1.0 / (2.0 * dt);
    if (f_lo < 0.0 || f_lo >= f_hi) {
        throw std::invalid_argument("bandpass: need 0 <= f_lo < f_hi");
    }
    if (f_hi > nyquist) {
        throw std::invalid_argument("bandpass: f_hi exceeds Nyquist (" +
                                    std::to_string(nyquist) + " Hz)");
    }

    // Reconstruct directly from the in-band bins: bin k covers frequency
    // k/(L*dt). Conjugate-symmetric bins are handled jointly so the output
    // is real, the half-band bin (even L) carries no doubled weight.
    const double n = static_cast<double>(len);
    std::vector<double> out(len, 0.0);
    const std::size_t k_max = len / 2;
    for (std::size_t k = 0; k <= k_max; k++) {
        const double freq = static_cast<double>(k) / (n * dt);
        if (freq < f_lo || freq > f_hi) {
            continue;
        }
        double re = 0.0;
        double im = 0.0;
        const double w = 2.0 * kPi * static_cast<double>(k) / n;
        for (std::size_t t = 0; t < len; t++) {
            const double ph = w * static_cast<double>(t);
            re += s[t] * std::cos(ph);
            im -= s[t] * std::sin(ph);
        }
        const bool shared = (k == 0) || (len % 2 == 0 && k == len / 2);
        const double scale = (shared ? 1.0 : 2.0) / n;
        for (std::size_t t = 0; t < len; t++) {
            const double ph = w * static_cast<double>(t);
            out[t] += scale * (re * std::cos(ph) - im * std::sin(ph));
        }
    }
    return out;
}

std::vector<double> znormalize(std::span<const double> s)
{
    const std::size_t len = s.size();
    if (len < 2) {
        throw std::invalid_argument("znormalize: series length must be >= 2");
    }
    std::vector<double> out(s.begin(), s.end());
    // Two rounds of mean removal keep the residual mean at the level of
    // the data's spread rather than its offset.
    for (int round = 0; round < 2; round++) {
        const double m = series_mean(out);
        for (double &v : out) {
            v -= m;
        }
    }
    double ss = 0.0;
    for (double v : out) {
        ss += v * v;
    }
    if (ss == 0.0) {
        throw DegenerateSeriesError("znormalize: constant series");
    }
    const double sd = std::sqrt(ss / static_cast<double>(len));
    for (double &v : out) {
        v /= sd;
    }
    return out;
}

Ensemble smooth_spatial(const Ensemble &e, double sigma)
{
    if (!e.grid) {
        throw std::invalid_argument("smooth_spatial: ensemble has no grid");
    }
    if (sigma <= 0.0) {
        throw std::invalid_argument("smooth_spatial: sigma must be positive");
    }
    e.validate();

    const auto &grid = *e.grid;
    const std::size_t n = e.count();
    const double radius = 3.0 * sigma;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);

    // Neighbor lists with kernel weights, renormalized over pixels present.
    std::vector<std::vector<std::pair<std::size_t, double>>> neigh(n);
    for (std::size_t i = 0; i < n; i++) {
        double total = 0.0;
        for (std::size_t j = 0; j < n; j++) {
            const double dr = static_cast<double>(grid[i].row - grid[j].row);
            const double dc = static_cast<double>(grid[i].col - grid[j].col);
            const double dist2 = dr * dr + dc * dc;
            if (std::sqrt(dist2) > radius) {
                continue;
            }
            const double w = std::exp(-dist2 * inv2s2);
            neigh[i].push_back({j, w});
            total += w;
        }
        for (auto &[j, w] : neigh[i]) {
            w /= total;
        }
    }

    Ensemble out = e;
    const std::size_t len = e.length();
    for (std::size_t t = 0; t < len; t++) {
        for (std::size_t i = 0; i < n; i++) {
            double acc = 0.0;
            for (const auto &[j, w] : neigh[i]) {
                acc += w * e.series[j][t];
            }
            out.series[i][t] = acc;
        }
    }
    return out;
}

std::optional<double> try_pearson(std::span<const double> a,
                                  std::span<const double> b)
{
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("pearson: need equal lengths >= 2");
    }
    const double ma = series_mean(a);
    const double mb = series_mean(b);
    const kernels::PearsonSums sums =
        kernels::pearson_sums(a.data(), b.data(), a.size(), ma, mb);
    if (sums.sxx == 0.0 || sums.syy == 0.0) {
        return std::nullopt;
    }
    const double r = sums.sxy / std::sqrt(sums.sxx * sums.syy);
    return std::clamp(r, -1.0, 1.0);
}

double pearson(std::span<const double> a, std::span<const double> b)
{
    const std::optional<double> r = try_pearson(a, b);
    if (!r) {
        throw DegenerateSeriesError("pearson: constant input series");
    }
    return *r;
}

Ensemble preprocess(const Ensemble &e, const PreprocessConfig &cfg)
{
    e.validate();
    if (cfg.band_lo.has_value() != cfg.band_hi.has_value()) {
        throw std::invalid_argument(
            "preprocess: band_lo and band_hi must be set together");
    }
    Ensemble out = cfg.drop > 0 ? drop_initial(e, cfg.drop) : e;
    for (std::size_t i = 0; i < out.count(); i++) {
        auto &s = out.series[i];
        try {
            if (cfg.detrend) {
                s = detrend(s);
            }
            if (cfg.band_lo) {
                s = bandpass(s, *cfg.band_lo, *cfg.band_hi, out.dt);
            }
            if (cfg.normalize) {
                s = znormalize(s);
            }
        } catch (const DegenerateSeriesError &) {
            throw DegenerateSeriesError(
                "preprocess: series " + std::to_string(i) +
                " is constant (or vanishes inside the band)");
        }
    }
    return out;
}

} // namespace mca
