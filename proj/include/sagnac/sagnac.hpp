// sagnac.hpp
// The round-trip interferometer: clockwise and counterclockwise double-pass
// arms, their coherent superposition on the two output modes, and the
// calibrated noise model applied at density-matrix level.

#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "density.hpp"
#include "elements.hpp"
#include "fock.hpp"
#include "spdc.hpp"

namespace sagnac {

inline const std::string kLoopPath = "loop";
inline const std::string kOut1Path = "out1";
inline const std::string kOut2Path = "out2";

inline std::vector<ModeLabel> loop_modes() {
    return {mode(kLoopPath, Pol::H), mode(kLoopPath, Pol::V)};
}

inline std::vector<ModeLabel> output_modes() {
    return {mode(kOut1Path, Pol::H), mode(kOut1Path, Pol::V), mode(kOut2Path, Pol::H),
            mode(kOut2Path, Pol::V)};
}

// dephase and mode_overlap multiply the cross-arm coherences; arm_imbalance
// skews the clockwise/counterclockwise amplitude ratio. Defaults are ideal.
struct NoiseParams {
    double dephase = 1.0;
    double mode_overlap = 1.0;
    double arm_imbalance = 0.0;

    double coherence() const { return dephase * mode_overlap; }
    void validate() const {
        if (dephase < 0.0 || dephase > 1.0) throw config_error("dephase must be in [0,1]");
        if (mode_overlap < 0.0 || mode_overlap > 1.0)
            throw config_error("mode_overlap must be in [0,1]");
        if (arm_imbalance <= -2.0 || arm_imbalance >= 2.0)
            throw config_error("arm_imbalance out of range");
    }
};

struct ExperimentConfig {
    double phi = M_PI;             // HWP1 tilt-induced dispersion phase
    double theta = 0.0;            // clockwise/counterclockwise relative phase dial
    PumpField pump = pump_linear(M_PI / 4.0);
    double hwp1_angle = M_PI / 4.0;
    double hwp2_angle = M_PI / 8.0;
    NoiseParams noise;
    SpdcSpec spdc;
};

namespace detail {

// Pair state inside the loop after the two SPDC passes and HWP2: the first-pass
// pair is rotated by HWP1, the second pass carries the dispersion phase phi.
inline FockState loop_pair_state(const ExperimentConfig& cfg) {
    const auto modes = loop_modes();
    FockState s = vacuum(modes);
    s = spdc_pass(s, PumpField{0.0, 1.0}, cfg.spdc, kLoopPath);
    s = apply_transform(hwp(cfg.hwp1_angle, kLoopPath, modes), s);
    PumpField second{0.0, std::exp(complexd{0.0, cfg.phi})};
    // second pass drops beyond-first-order emission (two pairs exceed the truncation)
    s = spdc_pass(s, second, cfg.spdc, kLoopPath, true);
    s = apply_transform(hwp(cfg.hwp2_angle, kLoopPath, modes), s);
    return s.photon_sector(2).normalize();
}

// Routes the loop pair through the PBS: H transmits, V reflects. The clockwise
// port sends H to out1, the counterclockwise port sends H to out2.
inline FockState route_pbs(const FockState& loop_state, bool clockwise) {
    const auto out = output_modes();
    FockState routed(out, loop_state.truncation());
    const std::string& h_path = clockwise ? kOut1Path : kOut2Path;
    const std::string& v_path = clockwise ? kOut2Path : kOut1Path;
    FockState tmp(out, loop_state.truncation());
    const int ih = tmp.mode_index(mode(h_path, Pol::H));
    const int iv = tmp.mode_index(mode(v_path, Pol::V));
    for (const auto& [occ, amp] : loop_state.amplitudes()) {
        Occupation o(out.size(), 0);
        o[ih] = occ[0];
        o[iv] = occ[1];
        routed.add(o, amp);
    }
    return routed;
}

}  // namespace detail

// Normalized two-photon state of the clockwise arm at the PBS output; vacuum
// when the pump has no H component to drive this direction.
inline FockState clockwise_state(const ExperimentConfig& cfg) {
    if (std::abs(cfg.pump.h) < kPruneThreshold) return vacuum(output_modes());
    return detail::route_pbs(detail::loop_pair_state(cfg), true);
}

// Mirror arm, driven by the pump V component; the theta phase relative to the
// clockwise arm is applied when the arms are superposed in output_state.
inline FockState counterclockwise_state(const ExperimentConfig& cfg) {
    if (std::abs(cfg.pump.v) < kPruneThreshold) return vacuum(output_modes());
    return detail::route_pbs(detail::loop_pair_state(cfg), false);
}

// Effective counterclockwise phase: the theta dial plus any pump H/V phase.
inline complexd ccw_phase(const ExperimentConfig& cfg) {
    const PumpField p = cfg.pump.normalized();
    double extra = 0.0;
    if (std::abs(p.h) > kPruneThreshold && std::abs(p.v) > kPruneThreshold)
        extra = std::arg(p.v) - std::arg(p.h);
    return std::exp(complexd{0.0, cfg.theta + extra});
}

// Coherent superposition of the arms weighted by the pump components, Eq-level
// ideal (no NoiseParams).
inline FockState output_state(const ExperimentConfig& cfg) {
    const PumpField p = cfg.pump.normalized();
    const double wh = std::abs(p.h);
    const double wv = std::abs(p.v);
    if (wh < kPruneThreshold && wv < kPruneThreshold)
        throw degenerate_sector_error("zero pump: both arms are vacuum");
    FockState sum = vacuum(output_modes());
    sum.scale(0.0);
    if (wh > kPruneThreshold) sum = sum + wh * clockwise_state(cfg);
    if (wv > kPruneThreshold) sum = sum + (wv * ccw_phase(cfg)) * counterclockwise_state(cfg);
    return sum.normalize();
}

// Density matrix of the one-photon-per-output sector with the noise model
// applied: cross-arm coherences damped by dephase*mode_overlap, arm weights
// skewed by arm_imbalance.
inline TwoQubitDensity output_density(const ExperimentConfig& cfg) {
    cfg.noise.validate();
    const PumpField p = cfg.pump.normalized();
    const double wh = std::abs(p.h);
    const double wv = std::abs(p.v);

    auto sector_vector = [](const FockState& s) {
        Vector4cd v = Vector4cd::Zero();
        for (int p1 = 0; p1 < 2; ++p1)
            for (int p2 = 0; p2 < 2; ++p2) {
                Occupation occ(4, 0);
                occ[p1] = 1;      // out1.H / out1.V
                occ[2 + p2] = 1;  // out2.H / out2.V
                v(2 * p1 + p2) = s.amplitude(occ);
            }
        return v;
    };

    Vector4cd a1 = Vector4cd::Zero();
    Vector4cd a2 = Vector4cd::Zero();
    if (wh > kPruneThreshold)
        a1 = wh * (1.0 + 0.5 * cfg.noise.arm_imbalance) * sector_vector(clockwise_state(cfg));
    if (wv > kPruneThreshold)
        a2 = (wv * (1.0 - 0.5 * cfg.noise.arm_imbalance) * ccw_phase(cfg)) *
             sector_vector(counterclockwise_state(cfg));

    const double w = a1.squaredNorm() + a2.squaredNorm();
    if (w < 1e-24)
        throw degenerate_sector_error("no weight in the one-photon-per-output sector");

    const double d = cfg.noise.coherence();
    Matrix4cd m = a1 * a1.adjoint() + a2 * a2.adjoint() +
                  d * (a1 * a2.adjoint() + a2 * a1.adjoint());
    m /= m.trace().real();
    return TwoQubitDensity{m};
}

}  // namespace sagnac
