// Shared test utilities: seeded random states, unitaries and densities.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <random>

#include <sagnac/density.hpp>
#include <sagnac/fock.hpp>

namespace testutil {

using sagnac::complexd;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline complexd random_amp(std::mt19937_64& g) {
    std::normal_distribution<double> n(0.0, 1.0);
    return complexd{n(g), n(g)};
}

// Haar-ish random unitary via QR of a Gaussian matrix.
inline Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& g) {
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = random_amp(g);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    Eigen::MatrixXcd q = qr.householderQ();
    Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
    return q;
}

// Random physical density matrix (Ginibre ensemble).
inline sagnac::TwoQubitDensity random_density(std::mt19937_64& g, int rank = 4) {
    Eigen::MatrixXcd a(4, rank);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < rank; ++j) a(i, j) = random_amp(g);
    Eigen::Matrix4cd m = a * a.adjoint();
    m /= m.trace().real();
    return sagnac::TwoQubitDensity{m};
}

inline Eigen::Vector2cd random_qubit(std::mt19937_64& g) {
    Eigen::Vector2cd v(random_amp(g), random_amp(g));
    return v.normalized();
}

// Random pure product state density.
inline sagnac::TwoQubitDensity random_product_density(std::mt19937_64& g) {
    const Eigen::Vector2cd a = random_qubit(g), b = random_qubit(g);
    Eigen::Vector4cd v;
    v << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
    return sagnac::TwoQubitDensity::pure(v);
}

inline double trace_distance(const sagnac::TwoQubitDensity& a, const sagnac::TwoQubitDensity& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(a.matrix - b.matrix, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace testutil
