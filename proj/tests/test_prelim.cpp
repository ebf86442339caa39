#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ouest/model.hpp"
#include "ouest/oracle.hpp"
#include "ouest/prelim.hpp"
#include "ouest/rng.hpp"
#include "ouest/sim.hpp"
#include "ouest/stats.hpp"

using namespace ouest;

namespace {

SamplePath stationary_path(Unknown which, double theta, double dt, double T,
                           std::uint64_t seed) {
    SystemParams p = with_unknown(SystemParams{}, which, theta);
    p.d2 = p.b * p.b / (2.0 * p.f);
    SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon_T = T;
    cfg.seed = seed;
    return simulate(p, cfg);
}

ParamSpec spec_f() {
    ParamSpec s;
    s.which = Unknown::F;
    s.alpha = 0.5;
    s.beta = 2.0;
    s.delta = 0.6;
    return s;
}

}  // namespace

TEST_SUITE_BEGIN("prelim");

TEST_CASE("statistics on a hand-made path") {
    SamplePath path;
    path.dt = 1.0;
    path.n_steps = 3;
    path.X = {0.0, 1.0, 3.0, 6.0};  // increments 1, 2, 3
    CHECK(stat_S(path, 3) == doctest::Approx((1.0 + 4.0 + 9.0) / 3.0));
    CHECK(stat_R(path, 3) == doctest::Approx((2.0 + 6.0) / 3.0));
    CHECK_THROWS_AS(stat_S(path, 4), std::invalid_argument);
    CHECK_THROWS_AS(stat_R(path, 1), std::invalid_argument);

    // grid must resolve unit spacing
    SamplePath bad = path;
    bad.dt = 0.3;
    CHECK_THROWS_AS(stat_S(bad, 1), std::invalid_argument);

    // sub-unit grid reads the same unit increments
    SamplePath fine;
    fine.dt = 0.5;
    fine.n_steps = 6;
    fine.X = {0.0, 0.5, 1.0, 2.0, 3.0, 4.5, 6.0};
    CHECK(stat_S(fine, 3) == doctest::Approx((1.0 + 4.0 + 9.0) / 3.0));
}

TEST_CASE("statistic means match the moment maps") {
    SUBCASE("pure noise: S is sigma^2, R is zero") {
        SystemParams p{1.0, 1.0, 0.0, 1.0, 0.0};
        SimConfig cfg;
        cfg.dt = 1.0;
        cfg.horizon_T = 10000.0;
        cfg.seed = 15;
        const SamplePath path = simulate(p, cfg);
        const long K = 10000;
        CHECK(stat_S(path, K) ==
              doctest::Approx(1.0).epsilon(3.0 * std::sqrt(2.0 / K)));
        CHECK(std::abs(stat_R(path, K)) < 3.0 / std::sqrt(double(K)));
    }
    SUBCASE("stationary state: S approaches phi, R approaches the lag-one map") {
        const SamplePath path = stationary_path(Unknown::F, 1.0, 1.0, 40000.0, 16);
        const long K = 40000;
        const SystemParams p = path.params_used;
        // tolerances are ~3 MC standard errors of the statistics
        CHECK(stat_S(path, K) ==
              doctest::Approx(phi(Unknown::F, 1.0, p).value).epsilon(0.03));
        CHECK(stat_R(path, K) ==
              doctest::Approx(0.19978820044686402).epsilon(0.12));
    }
    SUBCASE("decoupled observations: S is sigma^2") {
        SystemParams p{0.0, 1.0, 1.0, 1.0, 0.5};
        SimConfig cfg;
        cfg.dt = 1.0;
        cfg.horizon_T = 10000.0;
        cfg.seed = 17;
        const SamplePath path = simulate(p, cfg);
        CHECK(stat_S(path, 10000) == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("clipping rules and the inversion round trip") {
    const SystemParams p{1.0, 1.0, 1.0, 1.0, 0.0};
    ParamSpec spec = spec_f();

    SUBCASE("decreasing case: statistic above the range clips to alpha") {
        const double s_hi = phi(Unknown::F, spec.alpha, p).value + 0.2;
        const PrelimResult r = prelim_from_stat(s_hi, 100, spec, p);
        CHECK(r.theta1 == spec.alpha);
        CHECK(r.clipped1 == ClipSide::Lower);
        // boundary tie belongs to the clipped branch
        const PrelimResult tie = prelim_from_stat(
            phi(Unknown::F, spec.alpha, p).value, 100, spec, p);
        CHECK(tie.clipped1 == ClipSide::Lower);
        const PrelimResult lo = prelim_from_stat(
            phi(Unknown::F, spec.beta, p).value - 0.2, 100, spec, p);
        CHECK(lo.theta1 == spec.beta);
        CHECK(lo.clipped1 == ClipSide::Upper);
    }
    SUBCASE("quadratic case inverts exactly") {
        ParamSpec sb = spec_f();
        sb.which = Unknown::B;
        const double s = phi(Unknown::B, 1.3, p).value;
        const PrelimResult r = prelim_from_stat(s, 100, sb, p);
        CHECK(r.theta1 == doctest::Approx(1.3).epsilon(1e-10));
        CHECK(r.clipped1 == ClipSide::None);
        // statistic below sigma^2 clips low without a domain error
        const PrelimResult neg = prelim_from_stat(0.5, 100, sb, p);
        CHECK(neg.theta1 == sb.alpha);
        CHECK(neg.clipped1 == ClipSide::Lower);
    }
}

TEST_CASE("learning segment size and measurability") {
    const SamplePath path = stationary_path(Unknown::F, 1.0, 0.25, 10000.0, 18);
    ParamSpec spec = spec_f();
    const PrelimResult r = prelim_1d(path, spec, path.params_used);
    CHECK(r.K == 251);  // floor(10000^0.6)
    CHECK(r.theta1 >= spec.alpha);
    CHECK(r.theta1 <= spec.beta);

    // altering the path beyond T^delta leaves the estimator bit-identical
    SamplePath tampered = path;
    const long first_free = 4 * 252 + 1;  // beyond K unit increments
    for (std::size_t k = first_free; k < tampered.X.size(); ++k)
        tampered.X[k] += 17.0;
    const PrelimResult r2 = prelim_1d(tampered, spec, path.params_used);
    CHECK(r2.theta1 == r.theta1);
    CHECK(r2.stat_S == r.stat_S);
}

TEST_CASE("mean square error shrinks like 1/K") {
    ParamSpec spec = spec_f();
    const int reps = 200;
    double mse100 = 0, mse400 = 0;
    for (int i = 0; i < reps; ++i) {
        const SamplePath p100 =
            stationary_path(Unknown::F, 1.0, 1.0, 100.0, mix_seed(100, i));
        const SamplePath p400 =
            stationary_path(Unknown::F, 1.0, 1.0, 400.0, mix_seed(400, i));
        const double e100 =
            prelim_from_stat(stat_S(p100, 100), 100, spec, p100.params_used)
                .theta1 -
            1.0;
        const double e400 =
            prelim_from_stat(stat_S(p400, 400), 400, spec, p400.params_used)
                .theta1 -
            1.0;
        mse100 += e100 * e100;
        mse400 += e400 * e400;
    }
    mse100 /= reps;
    mse400 /= reps;
    CHECK(mse400 < mse100);
    CHECK(mse100 * 100.0 < 40.0);   // K * MSE stays bounded
    CHECK(mse400 * 400.0 < 40.0);
}

TEST_CASE("pair estimator from exact statistics") {
    const SystemParams p{1.0, 1.0, 1.0, 1.0, 0.5};
    ParamSpec spec;
    spec.which = Unknown::FB;
    spec.alpha = 0.25;
    spec.beta = 4.0;
    spec.alpha2 = 0.25;
    spec.beta2 = 4.0;
    spec.delta = 0.6;

    const double S = phi(Unknown::F, 1.0, p).value;  // f = b = 1 truth
    const double R = 0.19978820044686402;
    const PrelimResult r = prelim_2d_from_stats(S, R, 100, spec, p);
    CHECK(r.theta1 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.theta2 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.clipped1 == ClipSide::None);

    // non-positive lag-one statistic reads as fast mean reversion
    const PrelimResult rneg = prelim_2d_from_stats(S, -0.01, 100, spec, p);
    CHECK(rneg.theta1 == spec.beta);
    CHECK(rneg.clipped1 == ClipSide::Upper);

    // FA variant identifies the gain coordinate
    ParamSpec sfa = spec;
    sfa.which = Unknown::FA;
    const PrelimResult rfa = prelim_2d_from_stats(S, R, 100, sfa, p);
    CHECK(rfa.theta1 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rfa.theta2 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("pair estimator concentrates at the truth") {
    ParamSpec spec;
    spec.which = Unknown::FB;
    spec.alpha = 0.25;
    spec.beta = 4.0;
    spec.alpha2 = 0.25;
    spec.beta2 = 4.0;
    spec.delta = 0.6;
    const int reps = 150;
    int hits = 0;
    for (int i = 0; i < reps; ++i) {
        SystemParams p{1.0, 1.0, 1.0, 1.0, 0.5};
        SimConfig cfg;
        cfg.dt = 1.0;
        cfg.horizon_T = 100000.0;
        cfg.seed = mix_seed(606, i);
        const SamplePath path = simulate(p, cfg);
        const PrelimResult r = prelim_2d(path, spec, p);
        if (std::abs(r.theta1 - 1.0) < 0.5 && std::abs(r.theta2 - 1.0) < 0.5)
            ++hits;
    }
    CHECK(hits >= static_cast<int>(0.85 * reps));
}

TEST_CASE("json record shape") {
    const SystemParams p{1.0, 1.0, 1.0, 1.0, 0.0};
    const PrelimResult r = prelim_from_stat(1.2, 100, spec_f(), p);
    const std::string j = r.to_json(42);
    CHECK(j.find("\"case\":\"F\"") != std::string::npos);
    CHECK(j.find("\"K\":100") != std::string::npos);
    CHECK(j.find("\"seed\":42") != std::string::npos);
}

TEST_SUITE_END();
