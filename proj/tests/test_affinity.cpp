#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "mca/affinity.hpp"
#include "mca/instrument.hpp"
#include "mca/rng.hpp"
#include "mca/synth.hpp"

namespace {

mca::Ensemble sine_trio(std::size_t len)
{
    mca::Ensemble e;
    e.dt = 0.5;
    std::vector<double> s(len);
    for (std::size_t t = 0; t < len; t++) {
        s[t] = std::sin(2.0 * 3.14159265358979323846 *
                        static_cast<double>(t) / 48.8);
    }
    const auto z = mca::znormalize(s);
    e.series = {z, z, z};
    return e;
}

mca::Ensemble noise_ensemble(std::size_t n, std::size_t len,
                             std::uint64_t seed)
{
    mca::Ensemble e;
    e.dt = 0.5;
    e.series.resize(n);
    for (std::size_t i = 0; i < n; i++) {
        mca::Rng rng(mca::mix_seed(seed, {0xabc, i}));
        e.series[i].resize(len);
        for (double &v : e.series[i]) {
            v = rng.normal();
        }
    }
    return e;
}

} // namespace

TEST_CASE("identical noiseless sines predict each other nearly perfectly")
{
    const auto e = sine_trio(488);
    mca::PredictorConfig cfg;
    const auto a = mca::compute_affinity(e, cfg);
    REQUIRE(a.n == 3);
    for (std::size_t i = 0; i < 3; i++) {
        CHECK(a.at(i, i) == 0.0);
        for (std::size_t j = 0; j < 3; j++) {
            if (i != j) {
                CHECK(a.at(i, j) >= 0.99);
            }
        }
    }
}

TEST_CASE("white-noise pair stays near zero for 95% of seeds")
{
    int ok = 0;
    const int seeds = 20;
    for (int seed = 0; seed < seeds; seed++) {
        const auto e =
            noise_ensemble(2, 488, static_cast<std::uint64_t>(seed));
        mca::PredictorConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(seed);
        const auto a = mca::compute_affinity(e, cfg);
        if (std::abs(a.at(0, 1)) <= 0.25 && std::abs(a.at(1, 0)) <= 0.25) {
            ok++;
        }
    }
    CHECK(ok >= 19);
}

TEST_CASE("decoupling counters: N expensive builds, N(N-1) cheap evaluations")
{
    const std::size_t n = 50;
    const auto e = noise_ensemble(n, 120, 3);
    mca::PredictorConfig cfg;
    cfg.threads = 2;

    mca::instrument::reset();
    const auto a = mca::compute_affinity(e, cfg);
    const auto snap = mca::instrument::snapshot();
    CHECK(a.n == n);
    CHECK(snap.predictor_states == n);
    CHECK(snap.pair_predictions == n * (n - 1));

    // GRBF path: same stage counts plus exactly one clustering run and one
    // factorization per series.
    mca::PredictorConfig gcfg;
    gcfg.kind = mca::PredictorKind::grbf;
    gcfg.threads = 2;
    mca::instrument::reset();
    (void)mca::compute_affinity(e, gcfg);
    const auto gsnap = mca::instrument::snapshot();
    CHECK(gsnap.predictor_states == n);
    CHECK(gsnap.pair_predictions == n * (n - 1));
    CHECK(gsnap.fcm_runs == n);
    CHECK(gsnap.lsq_factorizations == n);
}

TEST_CASE("affinity is deterministic and thread-count independent")
{
    const auto e = noise_ensemble(8, 150, 11);
    for (const auto kind :
         {mca::PredictorKind::glm, mca::PredictorKind::grbf}) {
        mca::PredictorConfig cfg;
        cfg.kind = kind;
        cfg.seed = 5;
        cfg.threads = 1;
        const auto a1 = mca::compute_affinity(e, cfg);
        cfg.threads = 2;
        const auto a2 = mca::compute_affinity(e, cfg);
        cfg.threads = 7;
        const auto a3 = mca::compute_affinity(e, cfg);
        CHECK(a1.values == a2.values);
        CHECK(a1.values == a3.values);
    }
}

TEST_CASE("a single row can be reproduced from its own state")
{
    const auto e = noise_ensemble(6, 140, 13);
    mca::PredictorConfig cfg;
    cfg.seed = 21;
    const auto a = mca::compute_affinity(e, cfg);

    const std::size_t row = 3;
    const auto x = mca::embed(e.series[row], cfg.embed_dim);
    const auto state = mca::build_predictor_state(
        x, cfg, 1.0, mca::subset_seed(cfg, 0, 1.0));
    for (std::size_t j = 0; j < e.count(); j++) {
        if (j == row) {
            continue;
        }
        const auto targ = mca::targets(e.series[j], cfg.embed_dim);
        CHECK(mca::predict_skill(state, targ) == a.at(row, j));
    }
}

TEST_CASE("constant series are rejected with their indices")
{
    mca::Ensemble e = noise_ensemble(4, 100, 17);
    e.series[1].assign(100, 2.0);
    e.series[3].assign(100, -1.0);
    mca::PredictorConfig cfg;
    try {
        (void)mca::compute_affinity(e, cfg);
        FAIL("expected DegenerateSeriesError");
    } catch (const mca::DegenerateSeriesError &err) {
        const std::string msg = err.what();
        CHECK(msg.find('1') != std::string::npos);
        CHECK(msg.find('3') != std::string::npos);
    }
}

TEST_CASE("all affinity entries are finite and bounded by 1")
{
    const auto e = noise_ensemble(6, 200, 19);
    for (const auto kind :
         {mca::PredictorKind::glm, mca::PredictorKind::grbf}) {
        mca::PredictorConfig cfg;
        cfg.kind = kind;
        const auto a = mca::compute_affinity(e, cfg);
        for (const double v : a.values) {
            CHECK(std::isfinite(v));
            CHECK(std::abs(v) <= 1.0);
        }
    }
}

TEST_CASE("planted communities have stronger intra-block affinity")
{
    mca::CommunitySpec spec;
    spec.sizes = {6, 6};
    spec.length = 244;
    spec.noise_sigma = 0.5;
    spec.seed = 31;
    const auto [e, truth] = mca::gen_community_ensemble(spec);
    mca::PredictorConfig cfg;
    const auto a = mca::compute_affinity(e, cfg);
    const auto rm = mca::block_average(a, truth);
    // Diagonal blocks dominate the cross blocks.
    CHECK(rm.at(0, 0) > rm.at(0, 1));
    CHECK(rm.at(0, 0) > rm.at(1, 0));
    CHECK(rm.at(1, 1) > rm.at(0, 1));
    CHECK(rm.at(1, 1) > rm.at(1, 0));
}

TEST_CASE("block_average: constants, singletons, hand-computed blocks")
{
    // Constant off-diagonal matrix: every block mean equals the constant.
    const std::size_t n = 6;
    std::vector<double> values(n * n, 0.7);
    for (std::size_t i = 0; i < n; i++) {
        values[i * n + i] = 0.0;
    }
    const std::vector<mca::RegionMask> regions{
        {"a", {0, 1, 2}},
        {"b", {3, 4, 5}},
    };
    const auto rm = mca::block_average(values, n, regions);
    for (std::size_t p = 0; p < 2; p++) {
        for (std::size_t q = 0; q < 2; q++) {
            CHECK(rm.at(p, q) == doctest::Approx(0.7).epsilon(1e-12));
        }
    }

    // Singleton regions reproduce the raw entries.
    std::vector<double> two{0.0, 0.9, 0.4, 0.0};
    const std::vector<mca::RegionMask> singles{{"x", {0}}, {"y", {1}}};
    const auto rs = mca::block_average(two, 2, singles);
    CHECK(rs.at(0, 1) == 0.9);
    CHECK(rs.at(1, 0) == 0.4);
    CHECK(rs.at(0, 0) == 0.0); // no off-diagonal pairs inside a singleton

    // 2x2-series regions against a hand-filled matrix.
    std::vector<double> m4{
        0.0, 0.1, 0.2, 0.3, //
        0.4, 0.0, 0.5, 0.6, //
        0.7, 0.8, 0.0, 0.9, //
        1.0, 1.1, 1.2, 0.0, //
    };
    const std::vector<mca::RegionMask> pair{{"p", {0, 1}}, {"q", {2, 3}}};
    const auto rp = mca::block_average(m4, 4, pair);
    CHECK(rp.at(0, 0) == doctest::Approx((0.1 + 0.4) / 2.0));
    CHECK(rp.at(0, 1) == doctest::Approx((0.2 + 0.3 + 0.5 + 0.6) / 4.0));
    CHECK(rp.at(1, 0) == doctest::Approx((0.7 + 0.8 + 1.0 + 1.1) / 4.0));
    CHECK(rp.at(1, 1) == doctest::Approx((0.9 + 1.2) / 2.0));

    // Overlap detection.
    const std::vector<mca::RegionMask> overlap{{"p", {0, 1}}, {"q", {1, 2}}};
    CHECK_THROWS_AS(mca::block_average(m4, 4, overlap), std::invalid_argument);
}
