#include <doctest.h>

#include <cmath>
#include <random>

#include <sagnac/elements.hpp>
#include <sagnac/spdc.hpp>

#include "helpers.hpp"

using namespace sagnac;

namespace {
const std::string kPath = "loop";
const std::vector<ModeLabel> kModes{mode(kPath, Pol::H), mode(kPath, Pol::V)};
}

TEST_CASE("type-0 emission from a V pump populates the V pair term") {
    SpdcSpec spec;
    spec.pair_amplitude = 0.01;
    FockState s = spdc_pass(vacuum(kModes), PumpField{0.0, 1.0}, spec, kPath);
    // operator coefficient g carries the sqrt(2) ladder factor on |2_V>
    CHECK(std::abs(s.amplitude({0, 2}) - complexd{0.01 * std::sqrt(2.0), 0.0}) < 1e-14);
    CHECK(std::abs(s.amplitude({2, 0})) == 0.0);
}

TEST_CASE("a pump with no component on the selector leaves the state unchanged") {
    SpdcSpec spec;  // V selector
    FockState vac = vacuum(kModes);
    FockState s = spdc_pass(vac, PumpField{1.0, 0.0}, spec, kPath);
    CHECK(std::norm(inner_product(vac, s)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.amplitudes().size() == 1);
}

TEST_CASE("two passes with a 45 degree hwp between build the pair superposition") {
    SpdcSpec spec;
    spec.pair_amplitude = 0.02;
    const double phi = 1.1;
    FockState s = spdc_pass(vacuum(kModes), PumpField{0.0, 1.0}, spec, kPath);
    s = apply_transform(hwp(M_PI / 4.0, kPath, kModes), s);
    s = spdc_pass(s, PumpField{0.0, std::exp(complexd{0.0, phi})}, spec, kPath, true);
    const complexd a_h = s.amplitude({2, 0});
    const complexd a_v = s.amplitude({0, 2});
    CHECK(std::abs(a_h) == doctest::Approx(0.02 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::abs(a_v) == doctest::Approx(0.02 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::arg(a_v / a_h) == doctest::Approx(phi).epsilon(1e-12));
}

TEST_CASE("type-II emission populates only the orthogonal pair") {
    SpdcSpec spec;
    spec.kind = SpdcKind::TypeII;
    spec.pair_amplitude = 0.05;
    FockState s = spdc_pass(vacuum(kModes), PumpField{0.0, 1.0}, spec, kPath);
    CHECK(std::abs(s.amplitude({1, 1}) - complexd{0.05, 0.0}) < 1e-14);
    CHECK(std::abs(s.amplitude({2, 0})) == 0.0);
    CHECK(std::abs(s.amplitude({0, 2})) == 0.0);
}

TEST_CASE("emission is linear in the pump amplitude") {
    auto g = testutil::rng(7);
    std::uniform_real_distribution<double> uni(0.1, 2.0);
    SpdcSpec spec;
    spec.pair_amplitude = 0.01;
    for (int trial = 0; trial < 20; ++trial) {
        const double c = uni(g);
        FockState base = spdc_pass(vacuum(kModes), PumpField{0.0, 1.0}, spec, kPath);
        FockState scaled = spdc_pass(vacuum(kModes), PumpField{0.0, c}, spec, kPath);
        CHECK(std::abs(scaled.amplitude({0, 2}) - c * base.amplitude({0, 2})) < 1e-13);
    }
}

TEST_CASE("the pair inherits the pump phase exactly once") {
    SpdcSpec spec;
    spec.pair_amplitude = 0.01;
    const double delta = 0.73;
    FockState s = spdc_pass(vacuum(kModes), PumpField{0.0, std::exp(complexd{0.0, delta})}, spec,
                            kPath);
    CHECK(std::arg(s.amplitude({0, 2})) == doctest::Approx(delta).epsilon(1e-12));
}

TEST_CASE("double-pair term carries the second-order series coefficient") {
    SpdcSpec spec;
    spec.pair_amplitude = 0.1;
    FockState d = double_pair_term(spec, kPath);
    // closed form sqrt(n!) g^k / k!: amplitude of |4_V> is g^2/2 * sqrt(24)
    const double expected = 0.1 * 0.1 / 2.0 * std::sqrt(24.0);
    CHECK(std::abs(d.amplitude({0, 4}) - complexd{expected, 0.0}) < 1e-13);

    SpdcSpec zero = spec;
    zero.pair_amplitude = 0.0;
    CHECK(double_pair_term(zero, kPath).empty());
    CHECK_THROWS_AS(double_pair_term(spec, kPath, 2), config_error);
}

TEST_CASE("double-to-single pair amplitude ratio follows the ladder factors") {
    SpdcSpec spec;
    spec.pair_amplitude = 0.1;
    FockState single = spdc_pass(vacuum(kModes, 4), PumpField{0.0, 1.0}, spec, kPath);
    FockState dbl = double_pair_term(spec, kPath);
    // (g^2/2 sqrt(24)) / (g sqrt 2) = g sqrt(3)
    const double ratio = std::abs(dbl.amplitude({0, 4})) / std::abs(single.amplitude({0, 2}));
    CHECK(ratio == doctest::Approx(0.1 * std::sqrt(3.0)).epsilon(1e-12));
}
