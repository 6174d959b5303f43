// fock.hpp
// Sparse few-photon Fock states over labeled (spatial x polarization) modes,
// creation-operator polynomials and the associated ladder algebra.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sagnac {

using complexd = std::complex<double>;

inline constexpr double kPruneThreshold = 1e-15;
inline constexpr double kInnerTol = 1e-12;
inline constexpr int kDefaultTruncation = 2;

enum class Pol : uint8_t { H = 0, V = 1 };

inline char pol_char(Pol p) { return p == Pol::H ? 'H' : 'V'; }

// A mode is identified by a spatial path name plus a polarization.
struct ModeLabel {
    std::string spatial;
    Pol pol;

    friend bool operator==(const ModeLabel& a, const ModeLabel& b) {
        return a.pol == b.pol && a.spatial == b.spatial;
    }
    friend bool operator<(const ModeLabel& a, const ModeLabel& b) {
        if (a.spatial != b.spatial) return a.spatial < b.spatial;
        return static_cast<int>(a.pol) < static_cast<int>(b.pol);
    }
    std::string str() const { return spatial + "." + pol_char(pol); }
};

inline ModeLabel mode(std::string spatial, Pol p) { return ModeLabel{std::move(spatial), p}; }

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class truncation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class degenerate_sector_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Occupation = std::vector<int>;

inline int total_photons(const Occupation& occ) {
    int n = 0;
    for (int k : occ) n += k;
    return n;
}

// Sparse state: occupation vector -> complex amplitude, over an ordered mode list.
class FockState {
public:
    FockState() = default;
    FockState(std::vector<ModeLabel> modes, int truncation = kDefaultTruncation)
        : modes_(std::move(modes)), truncation_(truncation) {
        for (size_t i = 0; i < modes_.size(); ++i)
            for (size_t j = i + 1; j < modes_.size(); ++j)
                if (modes_[i] == modes_[j])
                    throw config_error("duplicate mode label: " + modes_[i].str());
    }

    const std::vector<ModeLabel>& modes() const { return modes_; }
    int truncation() const { return truncation_; }
    const std::map<Occupation, complexd>& amplitudes() const { return amps_; }
    bool empty() const { return amps_.empty(); }

    int mode_index(const ModeLabel& m) const {
        for (size_t i = 0; i < modes_.size(); ++i)
            if (modes_[i] == m) return static_cast<int>(i);
        throw config_error("unknown mode label: " + m.str());
    }

    complexd amplitude(const Occupation& occ) const {
        auto it = amps_.find(occ);
        return it == amps_.end() ? complexd{0.0, 0.0} : it->second;
    }

    void add(const Occupation& occ, complexd a) {
        if (occ.size() != modes_.size())
            throw config_error("occupation length does not match mode list");
        if (total_photons(occ) > truncation_)
            throw truncation_error("occupation exceeds photon-number truncation");
        amps_[occ] += a;
    }

    void scale(complexd c) {
        for (auto& [occ, a] : amps_) a *= c;
    }

    double norm_sq() const {
        double s = 0.0;
        for (const auto& [occ, a] : amps_) s += std::norm(a);
        return s;
    }
    double norm() const { return std::sqrt(norm_sq()); }

    FockState& prune() {
        for (auto it = amps_.begin(); it != amps_.end();)
            it = (std::abs(it->second) < kPruneThreshold) ? amps_.erase(it) : std::next(it);
        return *this;
    }

    FockState& normalize() {
        prune();
        const double n = norm();
        if (n < kPruneThreshold)
            throw degenerate_sector_error("cannot normalize a zero state");
        scale(1.0 / n);
        return *this;
    }

    // Keeps only occupations with total photon number n, unnormalized.
    FockState photon_sector(int n) const {
        FockState out(modes_, truncation_);
        for (const auto& [occ, a] : amps_)
            if (total_photons(occ) == n) out.add(occ, a);
        out.prune();
        return out;
    }

    friend FockState operator+(const FockState& a, const FockState& b) {
        if (a.modes_ != b.modes_) throw config_error("mode lists differ");
        FockState out = a;
        for (const auto& [occ, amp] : b.amps_) out.add(occ, amp);
        out.prune();
        return out;
    }

    friend FockState operator*(complexd c, const FockState& s) {
        FockState out = s;
        out.scale(c);
        return out;
    }

    // Occupation-ket pretty printer, e.g. "0.7071|1 out1.H, 1 out2.V>".
    std::string str() const {
        std::ostringstream os;
        os.precision(4);
        bool first = true;
        for (const auto& [occ, a] : amps_) {
            if (std::abs(a) < kPruneThreshold) continue;
            if (!first) os << " + ";
            first = false;
            // suppress float dust in the displayed components
            const double re = std::abs(a.real()) < 1e-12 * std::abs(a) ? 0.0 : a.real();
            const double im = std::abs(a.imag()) < 1e-12 * std::abs(a) ? 0.0 : a.imag();
            if (im == 0.0)
                os << re << "|";
            else
                os << "(" << re << (im < 0 ? "" : "+") << im << "i)|";
            bool any = false;
            for (size_t i = 0; i < occ.size(); ++i) {
                if (occ[i] == 0) continue;
                if (any) os << ", ";
                any = true;
                os << occ[i] << " " << modes_[i].str();
            }
            if (!any) os << "vac";
            os << ">";
        }
        if (first) os << "0";
        return os.str();
    }

private:
    std::vector<ModeLabel> modes_;
    int truncation_ = kDefaultTruncation;
    std::map<Occupation, complexd> amps_;
};

inline FockState vacuum(const std::vector<ModeLabel>& modes, int truncation = kDefaultTruncation) {
    if (modes.empty()) throw config_error("vacuum requires a nonempty mode list");
    FockState s(modes, truncation);
    s.add(Occupation(modes.size(), 0), complexd{1.0, 0.0});
    return s;
}

inline complexd inner_product(const FockState& a, const FockState& b) {
    if (a.modes() != b.modes()) throw config_error("inner product requires identical mode lists");
    complexd s{0.0, 0.0};
    for (const auto& [occ, amp] : a.amplitudes()) {
        auto it = b.amplitudes().find(occ);
        if (it != b.amplitudes().end()) s += std::conj(amp) * it->second;
    }
    return s;
}

// Product of creation operators with a coefficient; a polynomial is a sum of such terms.
struct CreationTerm {
    complexd coeff;
    std::vector<ModeLabel> ops;  // multiset of modes acted on
};

struct CreationOpPoly {
    std::vector<CreationTerm> terms;

    static CreationOpPoly identity() { return CreationOpPoly{{CreationTerm{{1.0, 0.0}, {}}}}; }

    static CreationOpPoly monomial(complexd c, std::vector<ModeLabel> ops) {
        return CreationOpPoly{{CreationTerm{c, std::move(ops)}}};
    }

    CreationOpPoly& operator+=(const CreationOpPoly& other) {
        terms.insert(terms.end(), other.terms.begin(), other.terms.end());
        return *this;
    }
};

// Applies a† ladder factors exactly: a†|n> = sqrt(n+1)|n+1>.
// drop_over_truncation keeps the in-truncation part instead of throwing.
inline FockState apply_poly(const CreationOpPoly& poly, const FockState& state,
                            bool drop_over_truncation = false) {
    FockState out(state.modes(), state.truncation());
    for (const auto& term : poly.terms) {
        std::vector<int> idx;
        idx.reserve(term.ops.size());
        for (const auto& m : term.ops) idx.push_back(state.mode_index(m));
        for (const auto& [occ, amp] : state.amplitudes()) {
            Occupation o = occ;
            double ladder = 1.0;
            for (int i : idx) {
                ladder *= std::sqrt(static_cast<double>(o[i] + 1));
                ++o[i];
            }
            if (total_photons(o) > state.truncation()) {
                if (drop_over_truncation) continue;
                throw truncation_error("apply_poly exceeds photon-number truncation");
            }
            out.add(o, term.coeff * amp * ladder);
        }
    }
    out.prune();
    return out;
}

}  // namespace sagnac
