// elements.hpp
// Passive linear-optical elements as unitary transforms of mode creation
// operators: wave plates, beam splitters, PBS routing, polarizer projection,
// and the reverse-HOM amplitude check.
//
// Conventions (the tests are phase-insensitive, these are fixed here once):
//   HWP Jones matrix  [[cos2t, sin2t], [sin2t, -cos2t]]   (determinant -1)
//   QWP Jones matrix  R(t) diag(1, i) R(-t)               (fast axis along t=0 H)
//   BS                sqrt(T) on transmission, i*sqrt(R) on reflection
//   PBS               H transmitted, V reflected, no reflection phase

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fock.hpp"

namespace sagnac {

using Matrix2cd = Eigen::Matrix2cd;
using MatrixXcd = Eigen::MatrixXcd;

// Unitary acting on creation operators of the listed modes:
//   a_j^dag -> sum_k U(k,j) a_k^dag
struct ModeTransform {
    std::vector<ModeLabel> modes;
    MatrixXcd matrix;
    std::string label;

    double unitarity_defect() const {
        MatrixXcd d = matrix * matrix.adjoint() - MatrixXcd::Identity(matrix.rows(), matrix.cols());
        return d.cwiseAbs().maxCoeff();
    }
};

namespace jones {

inline Matrix2cd rotation(double t) {
    Matrix2cd r;
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return r;
}

inline Matrix2cd hwp(double t) {
    Matrix2cd j;
    j << std::cos(2 * t), std::sin(2 * t), std::sin(2 * t), -std::cos(2 * t);
    return j;
}

inline Matrix2cd qwp(double t) {
    Matrix2cd retarder = Matrix2cd::Zero();
    retarder(0, 0) = 1.0;
    retarder(1, 1) = complexd{0.0, 1.0};
    return rotation(t) * retarder * rotation(-t);
}

inline Eigen::Vector2cd linear(double t) { return Eigen::Vector2cd(std::cos(t), std::sin(t)); }

}  // namespace jones

// Embeds a 2x2 Jones matrix on the (H, V) pair of one spatial path, identity elsewhere.
inline ModeTransform jones_on_path(const Matrix2cd& j, const std::string& path,
                                   const std::vector<ModeLabel>& modes, std::string label) {
    ModeTransform t{modes, MatrixXcd::Identity(static_cast<long>(modes.size()),
                                               static_cast<long>(modes.size())),
                    std::move(label)};
    int ih = -1, iv = -1;
    for (size_t k = 0; k < modes.size(); ++k) {
        if (modes[k].spatial != path) continue;
        (modes[k].pol == Pol::H ? ih : iv) = static_cast<int>(k);
    }
    if (ih < 0 || iv < 0) throw config_error("path has no H/V mode pair: " + path);
    t.matrix(ih, ih) = j(0, 0);
    t.matrix(ih, iv) = j(0, 1);
    t.matrix(iv, ih) = j(1, 0);
    t.matrix(iv, iv) = j(1, 1);
    return t;
}

inline ModeTransform hwp(double angle, const std::string& path, const std::vector<ModeLabel>& modes) {
    return jones_on_path(jones::hwp(angle), path, modes, "hwp");
}

inline ModeTransform qwp(double angle, const std::string& path, const std::vector<ModeLabel>& modes) {
    return jones_on_path(jones::qwp(angle), path, modes, "qwp");
}

// 50/50-style nonpolarizing splitter across two paths, acting identically on H and V.
inline ModeTransform bs(double reflectivity, const std::string& path1, const std::string& path2,
                        const std::vector<ModeLabel>& modes) {
    if (reflectivity < 0.0 || reflectivity > 1.0)
        throw config_error("beam-splitter reflectivity out of range");
    const double tr = std::sqrt(1.0 - reflectivity);
    const complexd rf = complexd{0.0, 1.0} * std::sqrt(reflectivity);
    ModeTransform t{modes, MatrixXcd::Identity(static_cast<long>(modes.size()),
                                               static_cast<long>(modes.size())),
                    "bs"};
    for (Pol p : {Pol::H, Pol::V}) {
        int i1 = -1, i2 = -1;
        for (size_t k = 0; k < modes.size(); ++k) {
            if (modes[k].pol != p) continue;
            if (modes[k].spatial == path1) i1 = static_cast<int>(k);
            if (modes[k].spatial == path2) i2 = static_cast<int>(k);
        }
        if (i1 < 0 || i2 < 0) throw config_error("bs paths must both carry H and V modes");
        t.matrix(i1, i1) = tr;
        t.matrix(i2, i2) = tr;
        t.matrix(i2, i1) = rf;
        t.matrix(i1, i2) = rf;
    }
    return t;
}

// PBS between two spatial paths: H stays on its path (transmission), V swaps paths.
inline ModeTransform pbs(const std::string& path1, const std::string& path2,
                         const std::vector<ModeLabel>& modes) {
    ModeTransform t{modes, MatrixXcd::Identity(static_cast<long>(modes.size()),
                                               static_cast<long>(modes.size())),
                    "pbs"};
    int v1 = -1, v2 = -1;
    for (size_t k = 0; k < modes.size(); ++k) {
        if (modes[k].pol != Pol::V) continue;
        if (modes[k].spatial == path1) v1 = static_cast<int>(k);
        if (modes[k].spatial == path2) v2 = static_cast<int>(k);
    }
    if (v1 < 0 || v2 < 0) throw config_error("pbs paths must both carry a V mode");
    t.matrix(v1, v1) = 0.0;
    t.matrix(v2, v2) = 0.0;
    t.matrix(v2, v1) = 1.0;
    t.matrix(v1, v2) = 1.0;
    return t;
}

// Applies the transform by rewriting each occupation as a creation-operator
// monomial, substituting a_j^dag -> sum_k U(k,j) a_k^dag and expanding.
inline FockState apply_transform(const ModeTransform& t, const FockState& state) {
    if (t.modes != state.modes()) throw config_error("transform mode list does not match state");
    const auto n_modes = state.modes().size();
    FockState out(state.modes(), state.truncation());

    for (const auto& [occ, amp] : state.amplitudes()) {
        // monomial coefficient: amplitude with ladder factors divided out
        double fact = 1.0;
        std::vector<int> ops;
        for (size_t i = 0; i < n_modes; ++i) {
            for (int k = 0; k < occ[i]; ++k) {
                ops.push_back(static_cast<int>(i));
                fact *= static_cast<double>(k + 1);
            }
        }
        const complexd base = amp / std::sqrt(fact);

        // expand the product of substituted operators over output occupations
        std::map<Occupation, complexd> partial;
        partial[Occupation(n_modes, 0)] = base;
        for (int j : ops) {
            std::map<Occupation, complexd> next;
            for (const auto& [o, c] : partial) {
                for (size_t k = 0; k < n_modes; ++k) {
                    const complexd u = t.matrix(static_cast<long>(k), j);
                    if (std::abs(u) < kPruneThreshold) continue;
                    Occupation o2 = o;
                    ++o2[k];
                    next[o2] += c * u;
                }
            }
            partial.swap(next);
        }
        for (auto& [o, c] : partial) {
            double f = 1.0;
            for (int nk : o)
                for (int k = 0; k < nk; ++k) f *= static_cast<double>(k + 1);
            out.add(o, c * std::sqrt(f));
        }
    }
    out.prune();
    return out;
}

// Ideal polarizer on one spatial path (removed polarizers are modeled by absence).
struct PolarizerSetting {
    double angle = 0.0;   // radians from H
    bool present = true;
};

// Projects the path's polarization onto the analyzer axis; unnormalized, the
// squared norm of the result is the transmission probability.
inline FockState polarizer_project(const FockState& state, const PolarizerSetting& setting,
                                   const std::string& path) {
    if (!setting.present) return state;
    // rotate so the analyzer axis becomes the path's H mode, drop crossed photons,
    // rotate back
    ModeTransform to_axis =
        jones_on_path(jones::rotation(-setting.angle), path, state.modes(), "pol-rot");
    FockState rotated = apply_transform(to_axis, state);
    const int crossed = rotated.mode_index(ModeLabel{path, Pol::V});
    FockState kept(state.modes(), state.truncation());
    for (const auto& [occ, amp] : rotated.amplitudes())
        if (occ[crossed] == 0) kept.add(occ, amp);
    ModeTransform back = jones_on_path(jones::rotation(setting.angle), path, state.modes(), "pol-rot");
    return apply_transform(back, kept).prune();
}

// Two-photon amplitudes after the source superposition passes the 22.5 deg HWP:
// pair state (a_H^dag^2 + e^{i phi} a_V^dag^2)/2 on one path, transformed.
struct ReverseHomAmplitudes {
    complexd two_h;
    complexd two_v;
    complexd one_one;  // coincidence term across the PBS outputs
};

inline ReverseHomAmplitudes reverse_hom_check(double phi) {
    const std::vector<ModeLabel> modes{mode("loop", Pol::H), mode("loop", Pol::V)};
    const ModeLabel h = modes[0], v = modes[1];
    CreationOpPoly pair;
    pair += CreationOpPoly::monomial(0.5, {h, h});
    pair += CreationOpPoly::monomial(0.5 * std::exp(complexd{0.0, phi}), {v, v});
    FockState psi1 = apply_poly(pair, vacuum(modes));
    FockState psi2 = apply_transform(hwp(M_PI / 8.0, "loop", modes), psi1);
    return ReverseHomAmplitudes{psi2.amplitude({2, 0}), psi2.amplitude({0, 2}),
                                psi2.amplitude({1, 1})};
}

}  // namespace sagnac
