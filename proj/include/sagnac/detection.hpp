// detection.hpp
// Measurement simulation: analyzer projectors, coincidence probabilities,
// Poisson count sampling, accidental-coincidence subtraction, sinusoidal
// fringe fitting and visibility, polarization correlation.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "density.hpp"
#include "elements.hpp"
#include "spdc.hpp"

namespace sagnac {

// Optional QWP followed by an optional polarizer per arm; absent analyzers
// accept the photon unconditionally.
struct AnalyzerSetting {
    std::optional<double> qwp1;
    std::optional<double> qwp2;
    std::optional<double> pol1;
    std::optional<double> pol2;
};

struct CountRecord {
    std::uint64_t singles1 = 0;
    std::uint64_t singles2 = 0;
    std::uint64_t coincidences = 0;
    double duration = 1.0;       // s
    double window = 2.3e-9;      // s
};

namespace detail {

// POVM element for one arm: identity if no polarizer, else Q^dag |pol><pol| Q.
inline Matrix2cd arm_operator(std::optional<double> qwp_angle, std::optional<double> pol_angle) {
    if (!pol_angle) return Matrix2cd::Identity();
    Eigen::Vector2cd axis = jones::linear(*pol_angle);
    if (qwp_angle) axis = jones::qwp(*qwp_angle).adjoint() * axis;
    return axis * axis.adjoint();
}

inline Matrix4cd kron2(const Matrix2cd& a, const Matrix2cd& b) {
    Matrix4cd k;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
}

// splitmix64, used to derive independent per-point seeds
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

inline double coincidence_prob(const TwoQubitDensity& rho, const AnalyzerSetting& s) {
    const Matrix4cd proj =
        detail::kron2(detail::arm_operator(s.qwp1, s.pol1), detail::arm_operator(s.qwp2, s.pol2));
    double p = (rho.matrix * proj).trace().real();
    if (p < 0.0 && p > -1e-12) p = 0.0;
    if (p > 1.0 && p < 1.0 + 1e-12) p = 1.0;
    return p;
}

// Marginal acceptance probability of one arm's analyzer (other arm open).
inline double marginal_prob(const TwoQubitDensity& rho, const AnalyzerSetting& s, int arm) {
    AnalyzerSetting only;
    if (arm == 1) {
        only.qwp1 = s.qwp1;
        only.pol1 = s.pol1;
    } else {
        only.qwp2 = s.qwp2;
        only.pol2 = s.pol2;
    }
    return coincidence_prob(rho, only);
}

// Pump QWP dial -> (theta, arm balance) by Jones calculus on the linearly
// polarized pump entering the QWP.
struct PumpSetting {
    double theta = 0.0;
    PumpField pump;
};

inline PumpSetting pump_qwp_to_theta(double qwp_angle, double pump_angle = M_PI / 4.0) {
    Eigen::Vector2cd e = jones::qwp(qwp_angle) * jones::linear(pump_angle);
    PumpSetting out;
    out.pump = PumpField{std::abs(e(0)), std::abs(e(1))};
    if (std::abs(e(0)) > 1e-12 && std::abs(e(1)) > 1e-12)
        out.theta = std::arg(e(1)) - std::arg(e(0));
    return out;
}

struct RateModel {
    double pair_rate = 1e5;   // produced pairs per second
    double eta1 = 1.0;
    double eta2 = 1.0;
    double duration = 1.0;    // s
    double window = 2.3e-9;   // s
};

// Poisson sampling of singles and coincidences. Deterministic under a fixed
// seed; callers scanning many points derive per-point seeds with mix_seed.
inline CountRecord sample_counts(double coinc_prob, double marg1, double marg2,
                                 const RateModel& rates, std::uint64_t seed) {
    if (coinc_prob < 0.0 || coinc_prob > 1.0) throw config_error("probability out of [0,1]");
    std::mt19937_64 rng(seed);
    auto draw = [&rng](double mean) -> std::uint64_t {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<std::uint64_t>(mean)(rng);
    };
    CountRecord rec;
    rec.duration = rates.duration;
    rec.window = rates.window;
    rec.singles1 = draw(rates.pair_rate * rates.eta1 * marg1 * rates.duration);
    rec.singles2 = draw(rates.pair_rate * rates.eta2 * marg2 * rates.duration);
    rec.coincidences = draw(rates.pair_rate * coinc_prob * rates.eta1 * rates.eta2 * rates.duration);
    return rec;
}

// corrected = C - S1*S2*window/duration, floored at zero
inline double subtract_accidentals(const CountRecord& rec) {
    if (rec.window <= 0.0 || rec.duration <= 0.0)
        throw config_error("window and duration must be positive");
    const double accidentals = static_cast<double>(rec.singles1) *
                               static_cast<double>(rec.singles2) * rec.window / rec.duration;
    return std::max(0.0, static_cast<double>(rec.coincidences) - accidentals);
}

struct FringeFit {
    double offset = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;       // C(a) = offset + amplitude*cos(2(a - phase))
    double visibility = 0.0;  // amplitude / offset
    double visibility_sigma = 0.0;
};

struct FringeScan {
    std::vector<double> angles;
    std::vector<CountRecord> records;
    FringeFit fit;
};

class fit_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Least-squares sinusoid with period pi in the analyzer angle. The model is
// linear in (offset, a, b) with C = offset + a*cos2t + b*sin2t; a Gauss-Newton
// pass in (offset, amplitude, phase) under Poisson weights then refines.
inline FringeFit fit_fringe(const std::vector<double>& angles, const std::vector<double>& counts) {
    const size_t n = angles.size();
    if (n < 4 || counts.size() != n) throw fit_error("fringe fit needs >= 4 points");

    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n), w(n);
    for (size_t i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = std::cos(2.0 * angles[i]);
        x(i, 2) = std::sin(2.0 * angles[i]);
        y(i) = counts[i];
        w(i) = 1.0 / std::max(counts[i], 1.0);  // Poisson weights
    }
    Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
    Eigen::Matrix3d m = xtw * x;
    const double m_scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    if (std::abs(m.determinant()) < 1e-12 * m_scale * m_scale * m_scale)
        throw fit_error("singular fringe design matrix (angles degenerate mod pi)");
    Eigen::Vector3d beta = m.ldlt().solve(xtw * y);

    double offset = beta(0);
    double amplitude = std::hypot(beta(1), beta(2));
    double phase = 0.5 * std::atan2(beta(2), beta(1));

    // Gauss-Newton refinement on (offset, amplitude, phase)
    for (int iter = 0; iter < 50; ++iter) {
        Eigen::MatrixXd j(n, 3);
        Eigen::VectorXd r(n);
        for (size_t i = 0; i < n; ++i) {
            const double c = std::cos(2.0 * (angles[i] - phase));
            const double s = std::sin(2.0 * (angles[i] - phase));
            r(i) = y(i) - (offset + amplitude * c);
            j(i, 0) = 1.0;
            j(i, 1) = c;
            j(i, 2) = 2.0 * amplitude * s;
        }
        Eigen::MatrixXd jtw = j.transpose() * w.asDiagonal();
        Eigen::Vector3d step = (jtw * j).ldlt().solve(jtw * r);
        offset += step(0);
        amplitude += step(1);
        phase += step(2);
        if (step.cwiseAbs().maxCoeff() < 1e-10) break;
    }
    if (amplitude < 0.0) {
        amplitude = -amplitude;
        phase += M_PI / 2.0;
    }

    FringeFit fit;
    fit.offset = offset;
    fit.amplitude = amplitude;
    fit.phase = phase;
    fit.visibility = offset > 0.0 ? amplitude / offset : 0.0;

    // visibility uncertainty by the delta method from the fit covariance
    Eigen::MatrixXd j(n, 3);
    for (size_t i = 0; i < n; ++i) {
        const double c = std::cos(2.0 * (angles[i] - phase));
        const double s = std::sin(2.0 * (angles[i] - phase));
        j(i, 0) = 1.0;
        j(i, 1) = c;
        j(i, 2) = 2.0 * amplitude * s;
    }
    Eigen::Matrix3d cov_inv = j.transpose() * w.asDiagonal() * j;
    if (std::abs(cov_inv.determinant()) > 1e-30 && offset > 0.0) {
        Eigen::Matrix3d cov = cov_inv.inverse();
        Eigen::Vector3d g(-amplitude / (offset * offset), 1.0 / offset, 0.0);
        const double var = g.transpose() * cov * g;
        fit.visibility_sigma = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return fit;
}

inline double polarization_correlation(double c_dd, double c_da) {
    const double total = c_dd + c_da;
    if (total <= 0.0) throw config_error("polarization correlation needs nonzero counts");
    return (c_dd - c_da) / total;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return detail::mix_seed(seed, index);
}

}  // namespace sagnac
