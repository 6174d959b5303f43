#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <sagnac/rates.hpp>

#include "helpers.hpp"

using namespace sagnac;

TEST_CASE("pair production rate from the measured slopes") {
    // reported slopes: 3.129e5 and 1.698e5 singles, 9.065e2 coincidences, Hz/mW
    const RateData d{3.129e5, 1.698e5, 9.065e2};
    CHECK(n_pair(d) == doctest::Approx(5.86e7).epsilon(2e-3));
    CHECK_THROWS_AS(n_pair(RateData{1.0, 1.0, 0.0}), config_error);
}

TEST_CASE("output rate from the coincidence slope and the loss chains") {
    // eta = 0.1 * 0.5 * 0.1 = 0.005 per arm
    const EfficiencyChain chain;
    CHECK(chain.total() == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(n_out(9.065e2, chain, chain) == doctest::Approx(3.6e7).epsilon(1e-2));

    EfficiencyChain bad;
    bad.eta_d = 0.0;
    CHECK_THROWS_AS(n_out(1.0, bad, chain), config_error);
}

TEST_CASE("nonlinear coefficient ratio is the squared quotient") {
    CHECK(type0_type2_ratio(18.5, 3.9) == doctest::Approx(22.5).epsilon(2e-3));
    CHECK(type0_type2_ratio(2.0, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(type0_type2_ratio(-1.0, 2.0), config_error);
}

TEST_CASE("n_pair is invariant under a common detection loss") {
    auto g = testutil::rng(5);
    std::uniform_real_distribution<double> eff(0.01, 1.0);
    const RateData truth{3e5, 2e5, 1e3};
    for (int trial = 0; trial < 100; ++trial) {
        // a pair rate R with arm efficiencies e1, e2 gives slopes
        // N1 = e1 R, N2 = e2 R, NC = e1 e2 R, so N1 N2 / NC = R always
        const double e1 = eff(g), e2 = eff(g);
        const double r = n_pair(truth);
        const RateData lossy{e1 * r, e2 * r, e1 * e2 * r};
        CHECK(n_pair(lossy) == doctest::Approx(r).epsilon(1e-12));
    }
}

TEST_CASE("n_out inverts the per-arm losses exactly") {
    const EfficiencyChain chain;
    const double eta = chain.total();
    for (double rate : {1.0, 9.065e2, 5e6}) {
        CHECK(n_out(rate, chain, chain) * eta * eta == doctest::Approx(rate).epsilon(1e-12));
    }
}

TEST_CASE("consistency check between the two rate estimates") {
    // 5.86e7 / 1.3e7 is within the stated order-of-magnitude band
    const ConsistencyReport r = consistency_check(5.86e7, 1.3e7);
    CHECK(r.ratio == doctest::Approx(4.508).epsilon(1e-3));
    CHECK(r.pass);
    CHECK(r.str().find("pass") != std::string::npos);

    CHECK_FALSE(consistency_check(1e9, 1e7).pass);
    CHECK_FALSE(consistency_check(1e6, 2e6).pass);  // below the lower edge
    CHECK_THROWS_AS(consistency_check(0.0, 1.0), config_error);
}

TEST_CASE("zero-intercept slope fit recovers a proportional law exactly") {
    std::vector<double> p, c;
    for (int i = 1; i <= 10; ++i) {
        p.push_back(0.5 * i);
        c.push_back(123.4 * 0.5 * i);
    }
    CHECK(fit_slope(p, c) == doctest::Approx(123.4).epsilon(1e-12));
    CHECK(fit_slope(p, c, false) == doctest::Approx(123.4).epsilon(1e-12));
    CHECK_THROWS_AS(fit_slope({1.0}, {2.0}), config_error);
    CHECK_THROWS_AS(fit_slope({0.0, 0.0}, {1.0, 2.0}), config_error);
}

TEST_CASE("free-intercept fit ignores a constant background") {
    std::vector<double> p, c;
    for (int i = 1; i <= 8; ++i) {
        p.push_back(static_cast<double>(i));
        c.push_back(50.0 + 7.0 * i);
    }
    CHECK(fit_slope(p, c, false) == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("slopes from a synthetic power scan round-trip the generator") {
    const RateData truth{3.129e5, 1.698e5, 9.065e2};
    std::vector<PowerScanPoint> scan;
    for (int i = 1; i <= 6; ++i) {
        const double mw = 0.2 * i;
        scan.push_back({mw, truth.n1 * mw, truth.n2 * mw, truth.nc * mw});
    }
    const RateData fitted = slopes_from_scan(scan);
    CHECK(fitted.n1 == doctest::Approx(truth.n1).epsilon(1e-12));
    CHECK(fitted.n2 == doctest::Approx(truth.n2).epsilon(1e-12));
    CHECK(fitted.nc == doctest::Approx(truth.nc).epsilon(1e-12));
    CHECK(n_pair(fitted) == doctest::Approx(n_pair(truth)).epsilon(1e-12));
}
