#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

// Counter-based seed derivation plus a small RNG with pinned algorithms.
// std::uniform_*_distribution is implementation-defined, so every draw that
// can reach an output file goes through this wrapper instead. Work units
// derive their seed from (master seed, stream tag, indices) and never from
// execution order, which keeps parallel runs bit-identical.

namespace mca {

namespace stream {
// Stream tags for seed derivation. STATE covers predictor-state construction
// and is shared by the affinity engine (repetition 0) and CCM repetitions.
inline constexpr std::uint64_t STATE = 1;
inline constexpr std::uint64_t SYNTH = 2;
inline constexpr std::uint64_t PERMUTATION = 3;
inline constexpr std::uint64_t LOUVAIN = 4;
} // namespace stream

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed,
                              std::initializer_list<std::uint64_t> words)
{
    std::uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
    for (std::uint64_t w : words) {
        h = splitmix64(h ^ w);
    }
    return h;
}

// xoshiro256** seeded via splitmix64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed)
    {
        std::uint64_t x = seed;
        for (auto &word : state_) {
            x = splitmix64(x);
            word = x;
        }
    }

    std::uint64_t next()
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n); rejection sampling, unbiased.
    std::uint64_t bounded(std::uint64_t n)
    {
        if (n <= 1) {
            return 0;
        }
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) {
                return r % n;
            }
        }
    }

    // Standard normal via Box-Muller (pinned, portable).
    double normal()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) {
            u1 = uniform01();
        }
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    // k distinct indices from [0, n), returned sorted ascending.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

    // In-place Fisher-Yates shuffle.
    template <typename T> void shuffle(std::vector<T> &v)
    {
        for (std::size_t i = v.size(); i > 1; i--) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k)
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4] = {};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace mca
