#include <doctest.h>

#include <cmath>
#include <random>

#include <sagnac/sagnac.hpp>

#include "helpers.hpp"

using namespace sagnac;

namespace {

// Output Bell superposition built directly from its defining amplitudes.
FockState reference_output(double theta) {
    FockState s(output_modes());
    const double w = 1.0 / std::sqrt(2.0);
    s.add({1, 0, 0, 1}, complexd{w, 0.0});                        // |1_H>_1 |1_V>_2
    s.add({0, 1, 1, 0}, w * std::exp(complexd{0.0, theta}));      // |1_V>_1 |1_H>_2
    return s;
}

double cross_output_weight(const FockState& s) {
    double p = 0.0;
    for (const auto& [occ, amp] : s.amplitudes())
        if (occ[0] + occ[1] == 1 && occ[2] + occ[3] == 1) p += std::norm(amp);
    return p;
}

}  // namespace

TEST_CASE("clockwise arm at phi = pi emits |1_H>_1 |1_V>_2") {
    ExperimentConfig cfg;
    FockState s = clockwise_state(cfg);
    CHECK(std::norm(s.amplitude({1, 0, 0, 1})) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("clockwise arm at phi = 0 has double occupancy only") {
    ExperimentConfig cfg;
    cfg.phi = 0.0;
    FockState s = clockwise_state(cfg);
    CHECK(cross_output_weight(s) < 1e-24);
    CHECK(std::norm(s.amplitude({2, 0, 0, 0})) + std::norm(s.amplitude({0, 0, 0, 2})) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cross-output coincidence weight follows sin^2(phi/2)") {
    for (int i = 0; i < 100; ++i) {
        ExperimentConfig cfg;
        cfg.phi = 2.0 * M_PI * i / 99.0;
        const double expected = std::sin(cfg.phi / 2.0) * std::sin(cfg.phi / 2.0);
        CHECK(std::abs(cross_output_weight(clockwise_state(cfg)) - expected) < 1e-12);
    }
}

TEST_CASE("counterclockwise arm mirrors the routing") {
    ExperimentConfig cfg;
    FockState s = counterclockwise_state(cfg);
    CHECK(std::norm(s.amplitude({0, 1, 1, 0})) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("counterclockwise arm is vacuum without a pump V component") {
    ExperimentConfig cfg;
    cfg.pump = PumpField{1.0, 0.0};
    FockState s = counterclockwise_state(cfg);
    CHECK(std::abs(s.amplitude(Occupation(4, 0))) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("theta dial sets the relative phase between the arms") {
    ExperimentConfig cfg;
    cfg.theta = M_PI / 2.0;
    FockState out = output_state(cfg);
    const complexd rel = out.amplitude({0, 1, 1, 0}) / out.amplitude({1, 0, 0, 1});
    CHECK(std::arg(rel) == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
}

TEST_CASE("output state reproduces the Bell superposition over a 64-point theta grid") {
    for (int i = 0; i < 64; ++i) {
        ExperimentConfig cfg;
        cfg.theta = 2.0 * M_PI * i / 64.0;
        FockState out = output_state(cfg);
        CHECK(std::abs(inner_product(reference_output(cfg.theta), out)) > 1.0 - 1e-12);
    }
}

TEST_CASE("bell-state switching: overlaps with psi+ and psi- partition unity") {
    FockState psi_p = reference_output(0.0);
    FockState psi_m = reference_output(M_PI);
    for (int i = 0; i < 32; ++i) {
        ExperimentConfig cfg;
        cfg.theta = 2.0 * M_PI * i / 32.0;
        FockState out = output_state(cfg);
        const double p_plus = std::norm(inner_product(psi_p, out));
        const double p_minus = std::norm(inner_product(psi_m, out));
        const double c = std::cos(cfg.theta / 2.0), s = std::sin(cfg.theta / 2.0);
        CHECK(std::abs(p_plus - c * c) < 1e-12);
        CHECK(std::abs(p_minus - s * s) < 1e-12);
        CHECK(std::abs(p_plus + p_minus - 1.0) < 1e-12);
    }
}

TEST_CASE("ideal output has no double occupancy in either output path") {
    ExperimentConfig cfg;
    FockState out = output_state(cfg);
    for (const auto& [occ, amp] : out.amplitudes()) {
        CHECK(occ[0] + occ[1] == 1);
        CHECK(occ[2] + occ[3] == 1);
    }
}

TEST_CASE("an unbalanced pump weights the arms accordingly") {
    ExperimentConfig cfg;
    cfg.pump = pump_linear(M_PI / 6.0);  // cos 30, sin 30
    FockState out = output_state(cfg);
    CHECK(std::norm(out.amplitude({1, 0, 0, 1})) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(std::norm(out.amplitude({0, 1, 1, 0})) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("pump-only-H output is the clockwise product state") {
    ExperimentConfig cfg;
    cfg.pump = PumpField{1.0, 0.0};
    FockState out = output_state(cfg);
    CHECK(std::norm(out.amplitude({1, 0, 0, 1})) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero pump is rejected") {
    ExperimentConfig cfg;
    cfg.pump = PumpField{0.0, 0.0};
    CHECK_THROWS_AS(output_state(cfg), config_error);
}

TEST_CASE("overlap with psi+ built from the output state is unity at theta = 0") {
    ExperimentConfig cfg;
    TwoQubitDensity rho = partial_trace_to_density(output_state(cfg), "out1", "out2");
    CHECK(fidelity(rho, bell::psi_plus()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("theta-averaged density is the classical mixture diag(0, 1/2, 1/2, 0)") {
    // numerical integration over theta, uniform in [0, 2pi)
    Matrix4cd avg = Matrix4cd::Zero();
    const int n = 64;
    for (int i = 0; i < n; ++i) {
        ExperimentConfig cfg;
        cfg.theta = 2.0 * M_PI * i / n;
        avg += partial_trace_to_density(output_state(cfg), "out1", "out2").matrix;
    }
    avg /= static_cast<double>(n);
    Matrix4cd expected = Matrix4cd::Zero();
    expected(1, 1) = 0.5;
    expected(2, 2) = 0.5;
    CHECK((avg - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ideal noise parameters give a pure psi+ density") {
    ExperimentConfig cfg;
    TwoQubitDensity rho = output_density(cfg);
    CHECK(fidelity(rho, bell::psi_plus()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho.purity() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("full dephasing leaves the classical mixture with fidelity 1/2") {
    ExperimentConfig cfg;
    cfg.noise.dephase = 0.0;
    TwoQubitDensity rho = output_density(cfg);
    CHECK(fidelity(rho, bell::psi_plus()) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(rho.matrix(1, 2)) < 1e-14);
}

TEST_CASE("coherence 0.746 reproduces fidelity 0.873") {
    ExperimentConfig cfg;
    cfg.noise.dephase = 0.746;
    TwoQubitDensity rho = output_density(cfg);
    // F = (1 + d)/2 for a phase-damped Bell state
    CHECK(fidelity(rho, bell::psi_plus()) == doctest::Approx(0.873).epsilon(1e-12));
}

TEST_CASE("output density stays physical over randomized noise parameters") {
    auto g = testutil::rng(99);
    std::uniform_real_distribution<double> uni01(0.0, 1.0);
    std::uniform_real_distribution<double> imb(-0.9, 0.9);
    for (int trial = 0; trial < 200; ++trial) {
        ExperimentConfig cfg;
        cfg.noise.dephase = uni01(g);
        cfg.noise.mode_overlap = uni01(g);
        cfg.noise.arm_imbalance = imb(g);
        cfg.theta = uni01(g) * 2.0 * M_PI;
        TwoQubitDensity rho = output_density(cfg);
        CHECK(rho.hermiticity_defect() < 1e-12);
        CHECK(rho.trace_defect() < 1e-12);
        CHECK(rho.min_eigenvalue() > -1e-10);
    }
}

TEST_CASE("noise parameter validation rejects out-of-range values") {
    ExperimentConfig cfg;
    cfg.noise.dephase = 1.5;
    CHECK_THROWS_AS(output_density(cfg), config_error);
}
