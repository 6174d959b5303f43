// rates.hpp
// Pair-production and output-rate bookkeeping: N_pair = N1*N2/NC,
// N_out = NC/(eta1*eta2), the type-0/type-II nonlinear-coefficient ratio and
// slope extraction from power-scan data.

#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fock.hpp"

namespace sagnac {

// Slopes versus pump power, Hz/mW.
struct RateData {
    double n1 = 0.0;
    double n2 = 0.0;
    double nc = 0.0;
};

struct EfficiencyChain {
    double eta_if = 0.1;   // interference-filter transmission
    double eta_bs = 0.5;   // splitter transmission
    double eta_d = 0.1;    // optical + detection losses

    double total() const {
        if (eta_if <= 0.0 || eta_if > 1.0 || eta_bs <= 0.0 || eta_bs > 1.0 || eta_d <= 0.0 ||
            eta_d > 1.0)
            throw config_error("efficiencies must be in (0,1]");
        return eta_if * eta_bs * eta_d;
    }
};

inline double n_pair(const RateData& d) {
    if (d.nc <= 0.0) throw config_error("n_pair requires a positive coincidence rate");
    return d.n1 * d.n2 / d.nc;
}

inline double n_out(double nc, const EfficiencyChain& chain1, const EfficiencyChain& chain2) {
    return nc / (chain1.total() * chain2.total());
}

inline double type0_type2_ratio(double d_type0, double d_type2) {
    if (d_type0 <= 0.0 || d_type2 <= 0.0)
        throw config_error("nonlinear coefficients must be positive");
    const double r = d_type0 / d_type2;
    return r * r;
}

struct ConsistencyReport {
    double ratio = 0.0;
    double band_low = 1.0;
    double band_high = 10.0;
    bool pass = false;

    std::string str() const {
        std::ostringstream os;
        os << "ratio=" << ratio << " band=[" << band_low << "," << band_high << "] "
           << (pass ? "pass" : "fail");
        return os.str();
    }
};

inline ConsistencyReport consistency_check(double n_pair_direct, double n_pair_roundtrip,
                                           double band_low = 1.0, double band_high = 10.0) {
    if (n_pair_direct <= 0.0 || n_pair_roundtrip <= 0.0)
        throw config_error("rates must be positive");
    ConsistencyReport r;
    r.ratio = n_pair_direct / n_pair_roundtrip;
    r.band_low = band_low;
    r.band_high = band_high;
    r.pass = r.ratio >= band_low && r.ratio <= band_high;
    return r;
}

struct PowerScanPoint {
    double power_mw = 0.0;
    double singles1 = 0.0;
    double singles2 = 0.0;
    double coincidences = 0.0;  // Hz, accidental-corrected upstream if applicable
};

// Least-squares slope of counts vs power; zero intercept by default since the
// scans pass through the origin.
inline double fit_slope(const std::vector<double>& power, const std::vector<double>& counts,
                        bool zero_intercept = true) {
    if (power.size() != counts.size() || power.size() < 2)
        throw config_error("slope fit needs >= 2 matched points");
    if (zero_intercept) {
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < power.size(); ++i) {
            num += power[i] * counts[i];
            den += power[i] * power[i];
        }
        if (den <= 0.0) throw config_error("degenerate power values");
        return num / den;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(power.size());
    for (size_t i = 0; i < power.size(); ++i) {
        sx += power[i];
        sy += counts[i];
        sxx += power[i] * power[i];
        sxy += power[i] * counts[i];
    }
    const double den = n * sxx - sx * sx;
    if (std::abs(den) < 1e-30) throw config_error("degenerate power values");
    return (n * sxy - sx * sy) / den;
}

inline RateData slopes_from_scan(const std::vector<PowerScanPoint>& scan,
                                 bool zero_intercept = true) {
    std::vector<double> p, s1, s2, cc;
    for (const auto& pt : scan) {
        p.push_back(pt.power_mw);
        s1.push_back(pt.singles1);
        s2.push_back(pt.singles2);
        cc.push_back(pt.coincidences);
    }
    return RateData{fit_slope(p, s1, zero_intercept), fit_slope(p, s2, zero_intercept),
                    fit_slope(p, cc, zero_intercept)};
}

}  // namespace sagnac
