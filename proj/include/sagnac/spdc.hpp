// spdc.hpp
// Perturbative SPDC pair emission driven by a classical undepleted pump.
// A single pass adds (drive amplitude) * (gain) * (pair creation term) to the
// state; the squeezing exponential is truncated at the requested order.

#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "fock.hpp"

namespace sagnac {

// Classical pump polarization amplitudes; only relative power bookkeeping.
struct PumpField {
    complexd h{1.0, 0.0};
    complexd v{0.0, 0.0};

    PumpField normalized() const {
        const double n = std::sqrt(std::norm(h) + std::norm(v));
        if (n < kPruneThreshold) throw config_error("pump field has zero power");
        return PumpField{h / n, v / n};
    }
};

inline PumpField pump_linear(double angle) {
    return PumpField{std::cos(angle), std::sin(angle)};
}

enum class SpdcKind { Type0, TypeII };

struct SpdcSpec {
    SpdcKind kind = SpdcKind::Type0;
    double pair_amplitude = 1e-3;        // perturbative gain per pass
    Pol pump_pol_selector = Pol::V;      // pump component that drives conversion
};

// Pair creation term on one path: type-0 produces a same-polarization pair of
// the driving pump polarization; type-II produces an H+V pair.
inline CreationOpPoly pair_poly(const SpdcSpec& spec, complexd coeff, const std::string& path) {
    if (spec.kind == SpdcKind::TypeII)
        return CreationOpPoly::monomial(coeff, {mode(path, Pol::H), mode(path, Pol::V)});
    const Pol p = spec.pump_pol_selector;
    return CreationOpPoly::monomial(coeff, {mode(path, p), mode(path, p)});
}

// state + drive * gain * (pair term applied to state); first order, unnormalized.
inline FockState spdc_pass(const FockState& state, const PumpField& pump, const SpdcSpec& spec,
                           const std::string& path, bool drop_over_truncation = false) {
    const complexd drive = (spec.pump_pol_selector == Pol::H) ? pump.h : pump.v;
    if (std::abs(drive) < kPruneThreshold) return state;
    FockState emitted = apply_poly(pair_poly(spec, drive * spec.pair_amplitude, path), state,
                                   drop_over_truncation);
    return state + emitted;
}

// Second-order term of the truncated exponential, g^2/2! * (pair term)^2 |0>.
inline FockState double_pair_term(const SpdcSpec& spec, const std::string& path,
                                  int truncation = 4) {
    if (truncation < 4) throw config_error("double-pair term requires truncation >= 4");
    const std::vector<ModeLabel> modes{mode(path, Pol::H), mode(path, Pol::V)};
    FockState vac = vacuum(modes, truncation);
    const CreationOpPoly k = pair_poly(spec, spec.pair_amplitude, path);
    FockState once = apply_poly(k, vac);
    FockState twice = apply_poly(k, once);
    twice.scale(0.5);  // 1/2! of the exponential series
    return twice.photon_sector(4);
}

}  // namespace sagnac
