// density.hpp
// Two-qubit polarization density matrices on the {HH, HV, VH, VV} basis,
// Bell states, fidelity/purity and the reduction from the one-photon-per-output
// sector of a Fock state.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "fock.hpp"

namespace sagnac {

using Matrix4cd = Eigen::Matrix4cd;
using Vector4cd = Eigen::Vector4cd;

struct TwoQubitDensity {
    Matrix4cd matrix = Matrix4cd::Zero();

    double hermiticity_defect() const {
        return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    }
    double trace_defect() const { return std::abs(matrix.trace() - complexd{1.0, 0.0}); }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix4cd> es(matrix, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
    double purity() const { return (matrix * matrix).trace().real(); }

    bool is_physical(double psd_tol = 1e-10, double tol = 1e-12) const {
        return hermiticity_defect() < tol && trace_defect() < tol && min_eigenvalue() > -psd_tol;
    }

    static TwoQubitDensity pure(const Vector4cd& psi) {
        Vector4cd v = psi.normalized();
        return TwoQubitDensity{v * v.adjoint()};
    }
};

namespace bell {
// basis order {HH, HV, VH, VV}
inline Vector4cd psi_plus() { return Vector4cd(0, 1, 1, 0) / std::sqrt(2.0); }
inline Vector4cd psi_minus() { return Vector4cd(0, 1, -1, 0) / std::sqrt(2.0); }
inline Vector4cd phi_plus() { return Vector4cd(1, 0, 0, 1) / std::sqrt(2.0); }
inline Vector4cd phi_minus() { return Vector4cd(1, 0, 0, -1) / std::sqrt(2.0); }
// psi_plus with its cross coherence damped by d; d=1 pure, d=0 classical mixture
inline TwoQubitDensity dephased_psi_plus(double d) {
    Matrix4cd m = Matrix4cd::Zero();
    m(1, 1) = 0.5;
    m(2, 2) = 0.5;
    m(1, 2) = 0.5 * d;
    m(2, 1) = 0.5 * d;
    return TwoQubitDensity{m};
}
}  // namespace bell

inline double fidelity(const TwoQubitDensity& rho, const Vector4cd& target) {
    const Vector4cd t = target.normalized();
    double f = (t.adjoint() * rho.matrix * t)(0, 0).real();
    if (f < 0.0 && f > -1e-12) f = 0.0;
    if (f > 1.0 && f < 1.0 + 1e-12) f = 1.0;
    return f;
}

// Reduces the two-photon sector with exactly one photon in each of the two kept
// spatial paths to a pure two-qubit polarization density matrix (renormalized
// within that sector).
inline TwoQubitDensity partial_trace_to_density(const FockState& state, const std::string& path1,
                                                const std::string& path2) {
    const std::array<std::array<ModeLabel, 2>, 2> arm{{
        {mode(path1, Pol::H), mode(path1, Pol::V)},
        {mode(path2, Pol::H), mode(path2, Pol::V)},
    }};
    std::array<std::array<int, 2>, 2> idx{};
    for (int a = 0; a < 2; ++a)
        for (int p = 0; p < 2; ++p) idx[a][p] = state.mode_index(arm[a][p]);

    Vector4cd psi = Vector4cd::Zero();
    for (int p1 = 0; p1 < 2; ++p1) {
        for (int p2 = 0; p2 < 2; ++p2) {
            Occupation occ(state.modes().size(), 0);
            occ[idx[0][p1]] += 1;
            occ[idx[1][p2]] += 1;
            psi(2 * p1 + p2) = state.amplitude(occ);
        }
    }
    if (psi.norm() < 1e-12)
        throw degenerate_sector_error(
            "state has no weight in the one-photon-per-output sector");
    return TwoQubitDensity::pure(psi);
}

}  // namespace sagnac
