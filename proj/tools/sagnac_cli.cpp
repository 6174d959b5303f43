// Command-line front end: runs the interferometer scenarios and writes the
// scan CSVs and key-value reports. Angles are degrees here, radians inside.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sagnac/calibration.hpp>
#include <sagnac/csv.hpp>
#include <sagnac/detection.hpp>
#include <sagnac/rates.hpp>
#include <sagnac/sagnac.hpp>
#include <sagnac/tomography.hpp>

namespace {

using namespace sagnac;

constexpr double kDeg = M_PI / 180.0;

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

// Options shared by the simulation subcommands.
struct RunOptions {
    std::uint64_t seed = 1;
    std::string out_path;
    double phi_deg = 180.0;
    double theta_deg = 0.0;
    double pump_h = 1.0;
    double pump_v = 1.0;
    double dephase = 1.0;
    double mode_overlap = 1.0;
    double arm_imbalance = 0.0;
    double pair_rate = 1e5;
    double eta1 = 1.0;
    double eta2 = 1.0;
    double duration = 1.0;
    double window = 2.3e-9;

    ExperimentConfig experiment() const {
        ExperimentConfig cfg;
        cfg.phi = phi_deg * kDeg;
        cfg.theta = theta_deg * kDeg;
        cfg.pump = PumpField{pump_h, pump_v};
        cfg.noise.dephase = dephase;
        cfg.noise.mode_overlap = mode_overlap;
        cfg.noise.arm_imbalance = arm_imbalance;
        return cfg;
    }

    RateModel rates() const {
        RateModel r;
        r.pair_rate = pair_rate;
        r.eta1 = eta1;
        r.eta2 = eta2;
        r.duration = duration;
        r.window = window;
        return r;
    }
};

void add_common(CLI::App* sub, RunOptions& o) {
    sub->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
    sub->add_option("--out", o.out_path, "Output file (default stdout)");
}

void add_state_options(CLI::App* sub, RunOptions& o) {
    sub->add_option("--phi", o.phi_deg, "Dispersion phase, degrees")->capture_default_str();
    sub->add_option("--theta", o.theta_deg, "Arm phase dial, degrees")->capture_default_str();
    sub->add_option("--pump-h", o.pump_h, "Pump H amplitude")->capture_default_str();
    sub->add_option("--pump-v", o.pump_v, "Pump V amplitude")->capture_default_str();
}

void add_noise_options(CLI::App* sub, RunOptions& o) {
    sub->add_option("--dephase", o.dephase, "Dephasing factor [0,1]")->capture_default_str();
    sub->add_option("--mode-overlap", o.mode_overlap, "Mode overlap [0,1]")->capture_default_str();
    sub->add_option("--arm-imbalance", o.arm_imbalance, "Arm amplitude imbalance")
        ->capture_default_str();
}

void add_rate_options(CLI::App* sub, RunOptions& o) {
    sub->add_option("--pair-rate", o.pair_rate, "Pair production rate, Hz")->capture_default_str();
    sub->add_option("--eta1", o.eta1, "Arm 1 efficiency")->capture_default_str();
    sub->add_option("--eta2", o.eta2, "Arm 2 efficiency")->capture_default_str();
    sub->add_option("--duration", o.duration, "Integration time per point, s")
        ->capture_default_str();
    sub->add_option("--window", o.window, "Coincidence window, s")->capture_default_str();
}

// Writes either to the requested file or to stdout.
void emit(const RunOptions& o, const std::string& text) {
    if (o.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out_path);
    if (!f) throw config_error("cannot open output file: " + o.out_path);
    f << text;
}

void append_density(std::ostringstream& os, const TwoQubitDensity& rho) {
    os << "# density real\n";
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) os << (c ? "," : "") << fmt(rho.matrix(r, c).real());
        os << "\n";
    }
    os << "# density imag\n";
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) os << (c ? "," : "") << fmt(rho.matrix(r, c).imag());
        os << "\n";
    }
    os << "# fidelity_psi_plus=" << fmt(fidelity(rho, bell::psi_plus()))
       << " purity=" << fmt(rho.purity()) << " s_max_linear=" << fmt(chsh_max_linear(rho))
       << "\n";
}

void cmd_state(const RunOptions& o) {
    const ExperimentConfig cfg = o.experiment();
    std::ostringstream os;
    os << output_state(cfg).str() << "\n";
    append_density(os, output_density(cfg));
    emit(o, os.str());
}

void cmd_fringe(const RunOptions& o, const std::string& basis, double pol2_deg, int points) {
    if (points < 4) throw config_error("fringe scan needs at least 4 points");
    if (basis != "linear" && basis != "circular")
        throw config_error("basis must be linear or circular");
    const TwoQubitDensity rho = output_density(o.experiment());
    const RateModel rates = o.rates();

    std::vector<double> angles, corrected;
    std::ostringstream os;
    os << "angle_deg,singles1,singles2,coincidences_raw,coincidences_corrected\n";
    for (int i = 0; i < points; ++i) {
        const double deg = 180.0 * i / points;
        AnalyzerSetting s;
        s.pol1 = deg * kDeg;
        s.pol2 = pol2_deg * kDeg;
        if (basis == "circular") {
            s.qwp1 = 0.0;
            s.qwp2 = 0.0;
        }
        const CountRecord rec =
            sample_counts(coincidence_prob(rho, s), marginal_prob(rho, s, 1),
                          marginal_prob(rho, s, 2), rates,
                          derive_seed(o.seed, static_cast<std::uint64_t>(i)));
        const double corr = subtract_accidentals(rec);
        angles.push_back(deg * kDeg);
        corrected.push_back(corr);
        os << fmt(deg) << "," << rec.singles1 << "," << rec.singles2 << "," << rec.coincidences
           << "," << fmt(corr) << "\n";
    }
    const FringeFit fit = fit_fringe(angles, corrected);
    os << "# visibility=" << fmt(fit.visibility) << " visibility_sigma="
       << fmt(fit.visibility_sigma) << " offset=" << fmt(fit.offset) << " amplitude="
       << fmt(fit.amplitude) << " phase_deg=" << fmt(fit.phase / kDeg) << "\n";
    emit(o, os.str());
}

void cmd_tilt_scan(const RunOptions& o, int points, bool sample) {
    if (points < 2) throw config_error("tilt scan needs at least 2 points");
    std::ostringstream os;
    os << (sample ? "phi_deg,coincidences\n" : "phi_deg,coincidence_prob\n");
    for (int i = 0; i < points; ++i) {
        RunOptions pt = o;
        pt.phi_deg = 360.0 * i / (points - 1);
        const FockState s = clockwise_state(pt.experiment());
        double p = 0.0;
        for (const auto& [occ, amp] : s.amplitudes())
            if (occ[0] + occ[1] == 1 && occ[2] + occ[3] == 1) p += std::norm(amp);
        os << fmt(pt.phi_deg) << ",";
        if (sample) {
            const CountRecord rec = sample_counts(p, 1.0, 1.0, o.rates(),
                                                  derive_seed(o.seed, static_cast<std::uint64_t>(i)));
            os << rec.coincidences;
        } else {
            os << fmt(p);
        }
        os << "\n";
    }
    emit(o, os.str());
}

void cmd_bell_switch(const RunOptions& o, int points, double pump_angle_deg) {
    if (points < 2) throw config_error("bell-switch scan needs at least 2 points");
    std::ostringstream os;
    os << "qwp_deg,theta_deg,correlation\n";
    for (int i = 0; i < points; ++i) {
        const double q_deg = -90.0 + 180.0 * i / (points - 1);
        const PumpSetting ps = pump_qwp_to_theta(q_deg * kDeg, pump_angle_deg * kDeg);
        RunOptions pt = o;
        pt.theta_deg = ps.theta / kDeg;
        pt.pump_h = std::abs(ps.pump.h);
        pt.pump_v = std::abs(ps.pump.v);
        ExperimentConfig cfg = pt.experiment();
        cfg.theta = ps.theta;  // exact phase, not the degree round trip
        double corr = 0.0;
        AnalyzerSetting dd, da;
        dd.pol1 = M_PI / 4.0;
        dd.pol2 = M_PI / 4.0;
        da.pol1 = M_PI / 4.0;
        da.pol2 = -M_PI / 4.0;
        const TwoQubitDensity rho = output_density(cfg);
        const double c_dd = coincidence_prob(rho, dd);
        const double c_da = coincidence_prob(rho, da);
        if (c_dd + c_da > 0.0) corr = polarization_correlation(c_dd, c_da);
        os << fmt(q_deg) << "," << fmt(ps.theta / kDeg) << "," << fmt(corr) << "\n";
    }
    emit(o, os.str());
}

void cmd_tomo(const RunOptions& o, const std::string& in_path, const std::string& method,
              int bootstrap) {
    const auto settings = standard_tomo_settings();
    std::vector<CountRecord> counts;
    std::vector<TomoSetting> used = settings;
    if (!in_path.empty()) {
        const csv::Table t = csv::read_file(in_path);
        const int c1 = t.column("setting1"), c2 = t.column("setting2");
        const int cc = t.column("coincidences"), cd = t.column("duration");
        used.clear();
        for (const auto& row : t.rows) {
            if (row[static_cast<size_t>(c1)].size() != 1 ||
                row[static_cast<size_t>(c2)].size() != 1)
                throw config_error("tomography settings must be single basis letters");
            used.push_back({row[static_cast<size_t>(c1)][0], row[static_cast<size_t>(c2)][0]});
            CountRecord rec;
            rec.coincidences =
                static_cast<std::uint64_t>(std::stoull(row[static_cast<size_t>(cc)]));
            rec.duration = std::stod(row[static_cast<size_t>(cd)]);
            counts.push_back(rec);
        }
    } else {
        counts = tomo_counts(output_density(o.experiment()), settings, o.rates(), o.seed);
    }

    TwoQubitDensity rho = method == "linear" ? reconstruct_linear(counts, used)
                                             : reconstruct_mle(counts, used);
    std::ostringstream os;
    append_density(os, rho);
    if (bootstrap > 1) {
        const double sigma = bootstrap_fidelity_sigma(rho, bell::psi_plus(), used, o.rates(),
                                                      o.seed, bootstrap);
        os << "# fidelity_sigma=" << fmt(sigma) << "\n";
    }
    emit(o, os.str());
}

void cmd_chsh(const RunOptions& o) {
    const TwoQubitDensity rho = output_density(o.experiment());
    const ChshSetting setting;
    const ChshCounts counts = chsh_sample_counts(rho, setting, o.rates(), o.seed);
    const ChshEstimate est = chsh_from_counts(counts);
    std::ostringstream os;
    os << "s=" << fmt(est.s) << "\n"
       << "sigma=" << fmt(est.sigma) << "\n"
       << "s_exact=" << fmt(chsh_s(rho, setting)) << "\n"
       << "s_max_linear=" << fmt(chsh_max_linear(rho)) << "\n";
    emit(o, os.str());
}

void cmd_rates(const RunOptions& o, const std::string& in_path, RateData slopes,
               EfficiencyChain chain, double d_type0, double d_type2) {
    if (!in_path.empty()) {
        const csv::Table t = csv::read_file(in_path);
        const int cp = t.column("power_mW"), c1 = t.column("singles1");
        const int c2 = t.column("singles2"), cc = t.column("coincidences");
        std::vector<PowerScanPoint> scan;
        for (const auto& row : t.rows)
            scan.push_back({std::stod(row[static_cast<size_t>(cp)]),
                            std::stod(row[static_cast<size_t>(c1)]),
                            std::stod(row[static_cast<size_t>(c2)]),
                            std::stod(row[static_cast<size_t>(cc)])});
        slopes = slopes_from_scan(scan);
    }
    const double pair = n_pair(slopes);
    const double out = n_out(slopes.nc, chain, chain);
    std::ostringstream os;
    os << "n1_slope=" << fmt(slopes.n1) << "\n"
       << "n2_slope=" << fmt(slopes.n2) << "\n"
       << "nc_slope=" << fmt(slopes.nc) << "\n"
       << "n_pair=" << fmt(pair) << "\n"
       << "n_out=" << fmt(out) << "\n"
       << "consistency: " << consistency_check(pair, out).str() << "\n";
    if (d_type0 > 0.0 && d_type2 > 0.0)
        os << "type0_type2_ratio=" << fmt(type0_type2_ratio(d_type0, d_type2)) << "\n";
    emit(o, os.str());
}

void cmd_calibrate(const RunOptions& o, const CalibrationTarget& target) {
    emit(o, calibrate(target).report(target));
}

// Plain key=value config file; command-line flags take precedence, so config
// entries are appended only for options that were not given explicitly.
std::vector<std::string> with_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config file: " + path);
    std::string line;
    while (std::getline(f, line)) {
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error("config line is not key=value: " + line);
        auto trim = [](std::string s) {
            const auto x = s.find_first_not_of(" \t\r");
            const auto y = s.find_last_not_of(" \t\r");
            return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw config_error("empty key in config line: " + line);
        const std::string flag = "--" + key;
        bool present = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
        if (!present) args.push_back(flag + "=" + value);
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Double-pass Sagnac entangled-photon source simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "key=value config file");

    RunOptions o;

    auto* state = app.add_subcommand("state", "Print the output state and density matrix");
    add_common(state, o);
    add_state_options(state, o);
    add_noise_options(state, o);
    state->callback([&] { cmd_state(o); });

    std::string basis = "linear";
    double pol2_deg = 45.0;
    int fringe_points = 19;
    auto* fringe = app.add_subcommand("fringe", "Analyzer-angle coincidence scan with fit");
    add_common(fringe, o);
    add_state_options(fringe, o);
    add_noise_options(fringe, o);
    add_rate_options(fringe, o);
    fringe->add_option("--basis", basis, "linear or circular")->capture_default_str();
    fringe->add_option("--pol2", pol2_deg, "Fixed arm-2 polarizer angle, degrees")
        ->capture_default_str();
    fringe->add_option("--points", fringe_points, "Scan points over 180 degrees")
        ->capture_default_str();
    fringe->callback([&] { cmd_fringe(o, basis, pol2_deg, fringe_points); });

    int tilt_points = 100;
    bool tilt_sample = false;
    auto* tilt = app.add_subcommand("tilt-scan", "Cross-output coincidence vs dispersion phase");
    add_common(tilt, o);
    add_state_options(tilt, o);
    add_rate_options(tilt, o);
    tilt->add_option("--points", tilt_points, "Scan points over 360 degrees")
        ->capture_default_str();
    tilt->add_flag("--sample", tilt_sample, "Emit Poisson-sampled counts instead of probability");
    tilt->callback([&] { cmd_tilt_scan(o, tilt_points, tilt_sample); });

    int switch_points = 19;
    double pump_angle_deg = 45.0;
    auto* bswitch = app.add_subcommand("bell-switch", "Polarization correlation vs pump QWP angle");
    add_common(bswitch, o);
    add_noise_options(bswitch, o);
    bswitch->add_option("--points", switch_points, "Scan points over the QWP range")
        ->capture_default_str();
    bswitch->add_option("--pump-angle", pump_angle_deg, "Laser polarization angle, degrees")
        ->capture_default_str();
    bswitch->callback([&] { cmd_bell_switch(o, switch_points, pump_angle_deg); });

    std::string tomo_in, tomo_method = "mle";
    int bootstrap = 0;
    auto* tomo = app.add_subcommand("tomo", "Two-qubit state tomography");
    add_common(tomo, o);
    add_state_options(tomo, o);
    add_noise_options(tomo, o);
    add_rate_options(tomo, o);
    tomo->add_option("--in", tomo_in, "Count table CSV (setting1,setting2,coincidences,duration)");
    tomo->add_option("--method", tomo_method, "mle or linear")->capture_default_str();
    tomo->add_option("--bootstrap", bootstrap, "Bootstrap resamples for the fidelity sigma")
        ->capture_default_str();
    tomo->callback([&] {
        if (tomo_method != "mle" && tomo_method != "linear")
            throw config_error("method must be mle or linear");
        cmd_tomo(o, tomo_in, tomo_method, bootstrap);
    });

    auto* chsh = app.add_subcommand("chsh", "CHSH Bell parameter from sampled counts");
    add_common(chsh, o);
    add_state_options(chsh, o);
    add_noise_options(chsh, o);
    add_rate_options(chsh, o);
    chsh->callback([&] { cmd_chsh(o); });

    std::string rates_in;
    RateData slopes{3.129e5, 1.698e5, 9.065e2};
    EfficiencyChain chain;
    double d_type0 = 0.0, d_type2 = 0.0;
    auto* rates = app.add_subcommand("rates", "Pair-rate bookkeeping report");
    add_common(rates, o);
    rates->add_option("--n1", slopes.n1, "Arm 1 singles slope, Hz/mW")->capture_default_str();
    rates->add_option("--n2", slopes.n2, "Arm 2 singles slope, Hz/mW")->capture_default_str();
    rates->add_option("--nc", slopes.nc, "Coincidence slope, Hz/mW")->capture_default_str();
    rates->add_option("--in", rates_in,
                      "Power-scan CSV (power_mW,singles1,singles2,coincidences)");
    rates->add_option("--eta-if", chain.eta_if, "Interference-filter transmission")
        ->capture_default_str();
    rates->add_option("--eta-bs", chain.eta_bs, "Splitter transmission")->capture_default_str();
    rates->add_option("--eta-d", chain.eta_d, "Optical + detection efficiency")
        ->capture_default_str();
    rates->add_option("--d-type0", d_type0, "Type-0 nonlinear coefficient, pm/V");
    rates->add_option("--d-type2", d_type2, "Type-II nonlinear coefficient, pm/V");
    rates->callback([&] { cmd_rates(o, rates_in, slopes, chain, d_type0, d_type2); });

    CalibrationTarget target;
    auto* cal = app.add_subcommand("calibrate", "Fit the noise model to measured observables");
    add_common(cal, o);
    cal->add_option("--vis-hv", target.vis_hv, "H/V visibility target")->capture_default_str();
    cal->add_option("--vis-diag", target.vis_diag, "Diagonal visibility target")
        ->capture_default_str();
    cal->add_option("--vis-circ", target.vis_circ, "Circular visibility target")
        ->capture_default_str();
    cal->add_option("--fidelity", target.fidelity, "Fidelity target")->capture_default_str();
    cal->add_option("--s", target.s_param, "CHSH S target (reported, weight 0 by default)")
        ->capture_default_str();
    cal->add_option("--weights", target.weights,
                    "Five weights: vis_hv vis_diag vis_circ fidelity s")
        ->expected(5);
    cal->callback([&] { cmd_calibrate(o, target); });

    try {
        std::vector<std::string> args = with_config(argc, argv);
        std::reverse(args.begin(), args.end());  // CLI11 takes reversed args
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const fit_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const mle_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const truncation_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const degenerate_sector_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
