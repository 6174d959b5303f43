// tomography.hpp
// Two-qubit state tomography from 16 projective coincidence settings: linear
// inversion, Poisson maximum-likelihood over a Cholesky parametrization, and
// CHSH Bell-parameter evaluation.
//
// Basis states per arm: H=(1,0), V=(0,1), D=(H+V)/sqrt2, A=(H-V)/sqrt2,
// R=(H-iV)/sqrt2, L=(H+iV)/sqrt2 (R is what a 0-degree QWP plus 45-degree
// polarizer selects under the element conventions in elements.hpp).

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "density.hpp"
#include "detection.hpp"

namespace sagnac {

using Vector2cd = Eigen::Vector2cd;

inline Vector2cd basis_ket(char label) {
    const double s = 1.0 / std::sqrt(2.0);
    switch (label) {
        case 'H': return Vector2cd(1, 0);
        case 'V': return Vector2cd(0, 1);
        case 'D': return Vector2cd(s, s);
        case 'A': return Vector2cd(s, -s);
        case 'R': return Vector2cd(s, complexd{0.0, -s});
        case 'L': return Vector2cd(s, complexd{0.0, s});
        default: throw config_error(std::string("unknown basis label: ") + label);
    }
}

struct TomoSetting {
    char arm1;
    char arm2;

    Vector4cd ket() const {
        const Vector2cd k1 = basis_ket(arm1), k2 = basis_ket(arm2);
        Vector4cd k;
        k << k1(0) * k2(0), k1(0) * k2(1), k1(1) * k2(0), k1(1) * k2(1);
        return k;
    }
    Matrix4cd projector() const {
        const Vector4cd k = ket();
        return k * k.adjoint();
    }
};

// The canonical 16-setting list of the standard two-qubit tomography protocol.
inline std::vector<TomoSetting> standard_tomo_settings() {
    return {{'H', 'H'}, {'H', 'V'}, {'V', 'V'}, {'V', 'H'}, {'R', 'H'}, {'R', 'V'},
            {'D', 'V'}, {'D', 'H'}, {'D', 'R'}, {'D', 'D'}, {'R', 'D'}, {'H', 'D'},
            {'V', 'D'}, {'V', 'L'}, {'H', 'L'}, {'R', 'L'}};
}

namespace detail {

// 16x16 real design matrix from a Hermitian operator basis to probabilities.
inline Eigen::MatrixXd design_matrix(const std::vector<TomoSetting>& settings,
                                     const std::array<Matrix4cd, 16>& basis) {
    Eigen::MatrixXd a(settings.size(), 16);
    for (size_t i = 0; i < settings.size(); ++i) {
        const Matrix4cd p = settings[i].projector();
        for (int j = 0; j < 16; ++j) a(static_cast<long>(i), j) = (p * basis[j]).trace().real();
    }
    return a;
}

inline std::array<Matrix4cd, 16> hermitian_basis() {
    std::array<Matrix2cd, 4> pauli;
    pauli[0] = Matrix2cd::Identity();
    pauli[1] << 0, 1, 1, 0;
    pauli[2] << 0, complexd{0, -1}, complexd{0, 1}, 0;
    pauli[3] << 1, 0, 0, -1;
    std::array<Matrix4cd, 16> b;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) b[4 * i + j] = kron2(pauli[i], pauli[j]);
    return b;
}

}  // namespace detail

inline void check_informationally_complete(const std::vector<TomoSetting>& settings) {
    if (settings.size() != 16) throw config_error("tomography requires 16 settings");
    const Eigen::MatrixXd a = detail::design_matrix(settings, detail::hermitian_basis());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 16) throw config_error("tomography settings are not informationally complete");
}

inline std::vector<CountRecord> tomo_counts(const TwoQubitDensity& rho,
                                            const std::vector<TomoSetting>& settings,
                                            const RateModel& rates, std::uint64_t seed) {
    check_informationally_complete(settings);
    std::vector<CountRecord> records;
    records.reserve(settings.size());
    for (size_t i = 0; i < settings.size(); ++i) {
        const double p = (rho.matrix * settings[i].projector()).trace().real();
        records.push_back(sample_counts(std::clamp(p, 0.0, 1.0), 1.0, 1.0, rates,
                                        derive_seed(seed, i)));
    }
    return records;
}

// Linear inversion on raw probabilities; exact for noiseless data, possibly
// non-PSD on sampled counts.
inline TwoQubitDensity reconstruct_linear_probs(const std::vector<double>& probs,
                                                const std::vector<TomoSetting>& settings) {
    check_informationally_complete(settings);
    if (probs.size() != settings.size()) throw config_error("probability/setting count mismatch");
    const auto basis = detail::hermitian_basis();
    const Eigen::MatrixXd a = detail::design_matrix(settings, basis);
    Eigen::VectorXd y(probs.size());
    for (size_t i = 0; i < probs.size(); ++i) y(static_cast<long>(i)) = probs[i];
    const Eigen::VectorXd coeffs = a.colPivHouseholderQr().solve(y);
    Matrix4cd m = Matrix4cd::Zero();
    for (int j = 0; j < 16; ++j) m += coeffs(j) * basis[static_cast<size_t>(j)];
    m /= m.trace().real();
    return TwoQubitDensity{m};
}

// Counts version: solves for the unnormalized matrix sigma with
// c_i = Tr(sigma P_i), then trace-normalizes. The flux scale drops out.
inline TwoQubitDensity reconstruct_linear(const std::vector<CountRecord>& counts,
                                          const std::vector<TomoSetting>& settings) {
    std::vector<double> c(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) c[i] = static_cast<double>(counts[i].coincidences);
    return reconstruct_linear_probs(c, settings);
}

class mle_error : public std::runtime_error {
public:
    mle_error(const std::string& msg, double grad_norm, TwoQubitDensity last)
        : std::runtime_error(msg), gradient_norm(grad_norm), last_iterate(std::move(last)) {}
    double gradient_norm;
    TwoQubitDensity last_iterate;
};

struct MleOptions {
    int max_iterations = 500;
    double gradient_tol = 1e-8;  // relative: scaled by the total count number
};

namespace detail {

// Lower-triangular Cholesky factor from 16 real parameters.
inline Matrix4cd cholesky_from_params(const Eigen::VectorXd& p) {
    Matrix4cd t = Matrix4cd::Zero();
    t(0, 0) = p(0);
    t(1, 1) = p(1);
    t(2, 2) = p(2);
    t(3, 3) = p(3);
    int k = 4;
    for (int r = 1; r < 4; ++r)
        for (int c = 0; c < r; ++c) {
            t(r, c) = complexd{p(k), p(k + 1)};
            k += 2;
        }
    return t;
}

}  // namespace detail

// Poisson maximum likelihood over rho = T^dag T / tr(T^dag T) with a free flux
// scale; quasi-Newton (BFGS) on the 17 real parameters, analytic gradient.
inline TwoQubitDensity reconstruct_mle(const std::vector<CountRecord>& counts,
                                       const std::vector<TomoSetting>& settings,
                                       const MleOptions& opts = {}) {
    check_informationally_complete(settings);
    if (counts.size() != settings.size()) throw config_error("count/setting size mismatch");
    const size_t ns = settings.size();
    std::vector<Matrix4cd> projs(ns);
    Eigen::VectorXd c(ns);
    double total = 0.0;
    for (size_t i = 0; i < ns; ++i) {
        projs[i] = settings[i].projector();
        c(static_cast<long>(i)) = static_cast<double>(counts[i].coincidences);
        total += c(static_cast<long>(i));
    }
    if (total <= 0.0) throw config_error("MLE needs nonzero total counts");

    constexpr int kDim = 17;  // 16 Cholesky parameters + log flux scale
    const double lambda_floor = 1e-12;

    auto unpack = [&](const Eigen::VectorXd& x, Matrix4cd& t, Matrix4cd& m, double& tr,
                      double& scale) {
        t = detail::cholesky_from_params(x.head(16));
        m = t.adjoint() * t;
        tr = m.trace().real();
        scale = std::exp(x(16));
    };

    // negative log-likelihood and its gradient
    auto eval = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) -> double {
        Matrix4cd t, m;
        double tr, scale;
        unpack(x, t, m, tr, scale);
        if (tr < 1e-30) return 1e30;
        double nll = 0.0;
        Matrix4cd g_m = Matrix4cd::Zero();  // d(nll)/dM
        double g_sigma = 0.0;
        for (size_t i = 0; i < ns; ++i) {
            const double mi = (m * projs[i]).trace().real();
            const double lam = std::max(scale * mi / tr, lambda_floor);
            nll += lam - c(static_cast<long>(i)) * std::log(lam);
            if (grad) {
                const double dnll_dlam = 1.0 - c(static_cast<long>(i)) / lam;
                g_m += dnll_dlam * (scale / tr) *
                       (projs[i] - (mi / tr) * Matrix4cd::Identity());
                g_sigma += dnll_dlam * lam;
            }
        }
        if (grad) {
            const Matrix4cd tg = t * g_m;  // dN/dT via Wirtinger calculus
            Eigen::VectorXd g(kDim);
            g(0) = 2.0 * tg(0, 0).real();
            g(1) = 2.0 * tg(1, 1).real();
            g(2) = 2.0 * tg(2, 2).real();
            g(3) = 2.0 * tg(3, 3).real();
            int k = 4;
            for (int r = 1; r < 4; ++r)
                for (int col = 0; col < r; ++col) {
                    g(k) = 2.0 * tg(r, col).real();
                    g(k + 1) = 2.0 * tg(r, col).imag();
                    k += 2;
                }
            g(16) = g_sigma;
            *grad = g;
        }
        return nll;
    };

    Eigen::VectorXd x = Eigen::VectorXd::Zero(kDim);
    x.head(4).setConstant(0.5);  // T = I/2 -> rho = I/4
    x(16) = std::log(std::max(total * 4.0 / static_cast<double>(ns), 1.0));

    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(kDim, kDim);
    Eigen::VectorXd grad(kDim);
    double f = eval(x, &grad);

    const double grad_tol = opts.gradient_tol * std::max(total, 1.0);
    // fallback gate when the line search stalls on a likelihood plateau
    const double stall_tol = 1e-4 * std::max(total, 1.0);
    int stalled = 0;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        if (grad.norm() < grad_tol || (stalled >= 5 && grad.norm() < stall_tol)) {
            Matrix4cd t, m;
            double tr, scale;
            unpack(x, t, m, tr, scale);
            return TwoQubitDensity{m / tr};
        }
        if (stalled >= 5) break;
        Eigen::VectorXd dir = -h_inv * grad;
        if (dir.dot(grad) > 0.0) {  // reset on loss of descent direction
            h_inv.setIdentity();
            dir = -grad;
        }
        double step = 1.0;
        double f_new = f;
        Eigen::VectorXd x_new = x;
        const double slope = grad.dot(dir);
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + step * dir;
            f_new = eval(x_new, nullptr);
            if (f_new <= f + 1e-4 * step * slope) break;
            step *= 0.5;
        }
        Eigen::VectorXd grad_new(kDim);
        eval(x_new, &grad_new);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd yv = grad_new - grad;
        const double sy = s.dot(yv);
        if (sy > 1e-12) {
            const Eigen::MatrixXd i_m = Eigen::MatrixXd::Identity(kDim, kDim);
            const Eigen::MatrixXd v = i_m - (s * yv.transpose()) / sy;
            h_inv = v * h_inv * v.transpose() + (s * s.transpose()) / sy;
        }
        stalled = (f - f_new < 1e-12 * (std::abs(f) + 1.0)) ? stalled + 1 : 0;
        x = x_new;
        f = f_new;
        grad = grad_new;
    }
    Matrix4cd t, m;
    double tr, scale;
    unpack(x, t, m, tr, scale);
    throw mle_error("MLE did not converge", grad.norm(), TwoQubitDensity{m / tr});
}

// ---------------------------------------------------------------------------
// CHSH

struct ChshSetting {
    double a = 0.0;
    double a_prime = M_PI / 4.0;
    double b = -M_PI / 8.0;       // sign convention for Psi+ correlations
    double b_prime = -3.0 * M_PI / 8.0;
};

namespace detail {

inline double correlation_e(const TwoQubitDensity& rho, double a, double b) {
    auto p = [&](double t1, double t2) {
        AnalyzerSetting s;
        s.pol1 = t1;
        s.pol2 = t2;
        return coincidence_prob(rho, s);
    };
    const double pp = p(a, b);
    const double mm = p(a + M_PI / 2.0, b + M_PI / 2.0);
    const double pm = p(a, b + M_PI / 2.0);
    const double mp = p(a + M_PI / 2.0, b);
    const double total = pp + mm + pm + mp;
    if (total <= 0.0) throw config_error("zero total probability in CHSH correlation");
    return (pp + mm - pm - mp) / total;
}

}  // namespace detail

inline double chsh_s(const TwoQubitDensity& rho, const ChshSetting& s = {}) {
    const double e1 = detail::correlation_e(rho, s.a, s.b);
    const double e2 = detail::correlation_e(rho, s.a, s.b_prime);
    const double e3 = detail::correlation_e(rho, s.a_prime, s.b);
    const double e4 = detail::correlation_e(rho, s.a_prime, s.b_prime);
    return std::abs(e1 - e2 + e3 + e4);
}

// Largest S attainable with linear polarizers (analyzers confined to the
// sigma_z / sigma_x plane): 2*sqrt of the sum of the two squared singular
// values of the corresponding 2x2 block of the correlation matrix.
inline double chsh_max_linear(const TwoQubitDensity& rho) {
    std::array<Matrix2cd, 2> obs;  // sigma_z, sigma_x
    obs[0] << 1, 0, 0, -1;
    obs[1] << 0, 1, 1, 0;
    Eigen::Matrix2d block;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            block(i, j) = (rho.matrix * detail::kron2(obs[static_cast<size_t>(i)],
                                                      obs[static_cast<size_t>(j)]))
                              .trace()
                              .real();
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(block);
    const auto sv = svd.singularValues();
    return 2.0 * std::sqrt(sv(0) * sv(0) + sv(1) * sv(1));
}

struct ChshEstimate {
    double s = 0.0;
    double sigma = 0.0;
};

// Four corrected counts per angle pair, ordered (++, +-, -+, --) where "+" is
// the polarizer at the stated angle and "-" at the angle + 90 degrees.
struct ChshCounts {
    std::array<std::array<double, 4>, 4> counts{};  // [pair index][projector combo]
};

inline ChshEstimate chsh_from_counts(const ChshCounts& data) {
    double s = 0.0;
    double var = 0.0;
    const std::array<double, 4> sign{1.0, -1.0, 1.0, 1.0};
    for (int k = 0; k < 4; ++k) {
        const auto& c = data.counts[static_cast<size_t>(k)];
        const double cpp = c[0], cpm = c[1], cmp = c[2], cmm = c[3];
        const double total = cpp + cpm + cmp + cmm;
        if (total <= 0.0) throw config_error("zero total counts in a CHSH correlation");
        const double e = (cpp + cmm - cpm - cmp) / total;
        s += sign[static_cast<size_t>(k)] * e;
        // Poisson propagation through E = (a - b)/(a + b)
        const double a = cpp + cmm, b = cpm + cmp;
        const double da = 2.0 * b / (total * total);
        const double db = -2.0 * a / (total * total);
        var += da * da * a + db * db * b;
    }
    return ChshEstimate{std::abs(s), std::sqrt(var)};
}

// Simulates the 16 polarizer-combination counts for the four CHSH angle pairs.
inline ChshCounts chsh_sample_counts(const TwoQubitDensity& rho, const ChshSetting& setting,
                                     const RateModel& rates, std::uint64_t seed) {
    const std::array<std::pair<double, double>, 4> pairs{
        std::pair{setting.a, setting.b}, std::pair{setting.a, setting.b_prime},
        std::pair{setting.a_prime, setting.b}, std::pair{setting.a_prime, setting.b_prime}};
    ChshCounts out;
    std::uint64_t idx = 0;
    for (int k = 0; k < 4; ++k) {
        const auto [a, b] = pairs[static_cast<size_t>(k)];
        const std::array<std::pair<double, double>, 4> combos{
            std::pair{a, b}, std::pair{a, b + M_PI / 2.0}, std::pair{a + M_PI / 2.0, b},
            std::pair{a + M_PI / 2.0, b + M_PI / 2.0}};
        for (int j = 0; j < 4; ++j) {
            AnalyzerSetting s;
            s.pol1 = combos[static_cast<size_t>(j)].first;
            s.pol2 = combos[static_cast<size_t>(j)].second;
            const double p = coincidence_prob(rho, s);
            const CountRecord rec =
                sample_counts(p, 1.0, 1.0, rates, derive_seed(seed, idx++));
            // combo order (++, +-, -+, --) maps to indices 0,1,2,3
            out.counts[static_cast<size_t>(k)][static_cast<size_t>(j)] =
                static_cast<double>(rec.coincidences);
        }
    }
    return out;
}

// Parametric bootstrap of the fidelity uncertainty: resample counts from the
// reconstructed density and repeat the reconstruction.
inline double bootstrap_fidelity_sigma(const TwoQubitDensity& rho, const Vector4cd& target,
                                       const std::vector<TomoSetting>& settings,
                                       const RateModel& rates, std::uint64_t seed,
                                       int resamples = 100) {
    std::vector<double> fids;
    fids.reserve(static_cast<size_t>(resamples));
    for (int r = 0; r < resamples; ++r) {
        const auto counts = tomo_counts(rho, settings, rates, derive_seed(seed, 1000 + r));
        fids.push_back(fidelity(reconstruct_mle(counts, settings), target));
    }
    double mean = 0.0;
    for (double f : fids) mean += f;
    mean /= static_cast<double>(fids.size());
    double var = 0.0;
    for (double f : fids) var += (f - mean) * (f - mean);
    var /= static_cast<double>(fids.size() - 1);
    return std::sqrt(var);
}

}  // namespace sagnac
