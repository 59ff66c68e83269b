// Acceptance suite: every headline quantitative claim of the project, one
// pass/fail line each, exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "aqm/crosstalk.hpp"
#include "aqm/detection.hpp"
#include "aqm/holography.hpp"
#include "aqm/protocols.hpp"
#include "aqm/rng.hpp"
#include "aqm/scenario.hpp"

using namespace aqm;
using lindblad::Matrix;
using lindblad::ProbeBeam;

namespace {

int g_failures = 0;

struct Criterion {
    std::string label;
    double time_limit;  // seconds; 0 = unlimited
    std::function<bool(std::string&)> run;
};

void run_criterion(const Criterion& c) {
    std::string detail;
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        ok = c.run(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = c.time_limit <= 0 || dt <= c.time_limit;
    if (!in_time) detail += " [exceeded time limit]";
    bool pass = ok && in_time;
    if (!pass) ++g_failures;
    std::printf("[%s] %s: %s (%.1f s%s)\n", pass ? "PASS" : "FAIL", c.label.c_str(),
                detail.c_str(), dt,
                c.time_limit > 0 ? (" / limit " + std::to_string(int(c.time_limit)) + " s").c_str()
                                 : "");
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// 1. numeric Lindblad under the collapse table vs the analytic chain:
//    F = e^{-gt/3}, R_c = e^{-gt/2}, and the closed-form Ramsey readout
bool c1_analytic_chain(std::string& detail) {
    const double gamma = 600.0;
    const double duw = kTwoPi * 10e3;
    Matrix h = lindblad::h_atom_reduced(duw, kTwoPi * 3.25e6);
    auto ops = lindblad::weak_probe_collapse_ops(lindblad::WeakProbeClass::D10_Pi, gamma);
    lindblad::IntegratorOptions tol{1e-11, 1e-14, 0.0};
    Matrix u = lindblad::half_pi_pulse(4);

    double worst = 0;
    for (double gt : {0.25, 0.9, 1.8, 3.0}) {
        double t = gt / gamma;
        // fidelity of the held up state
        Matrix rho = lindblad::evolve(lindblad::pure_state(4, 2), h, ops, t, tol);
        double f = std::sqrt(rho(2, 2).real());
        worst = std::max(worst, std::abs(f / std::exp(-gamma * t / 3) - 1.0));
        // Ramsey fringe contrast after the wait
        Matrix r2 = lindblad::pure_state(4, 0);
        r2 = (u * r2 * u.adjoint()).eval();
        r2 = lindblad::evolve(r2, h, ops, t, tol);
        double contrast = 2.0 * std::abs(r2(0, 2));
        worst = std::max(worst, std::abs(contrast / std::exp(-gamma * t / 2) - 1.0));
        // and the full closed-form readout
        r2 = (u * r2 * u.adjoint()).eval();
        double expect = lindblad::analytic_ramsey_rho22(gamma, duw, t);
        worst = std::max(worst, std::abs(r2(2, 2).real() / expect - 1.0));
    }
    detail = "max relative error " + fmt(worst) + " (limit 1e-6)";
    return worst < 1e-6;
}

// 2. (2/3)R_c + 1/3 vs the Uhlmann fidelity for 50 random weak probes
bool c2_eq1_vs_eq2(std::string& detail) {
    Rng rng(1234);
    double worst = 0;
    int used = 0;
    while (used < 50) {
        ProbeBeam probe;
        double pi_f = rng.uniform();
        probe.pi_fraction = pi_f;
        probe.sigma_plus_fraction = (1 - pi_f) * rng.uniform();
        probe.sigma_minus_fraction = 1 - pi_f - probe.sigma_plus_fraction;
        probe.d1_11_fraction = rng.uniform();
        probe.intensity_sat = 1e-3 * rng.uniform();
        double gamma = lindblad::weak_probe_gamma(probe, {}).total;
        if (gamma <= 0) continue;
        ++used;
        double tau = (0.03 + 0.12 * rng.uniform()) / gamma;  // P_AQM <= 5% regime

        protocols::RamseyConfig cfg;
        cfg.probe = probe;
        cfg.wait_grid = {tau};
        auto ram = protocols::simulate_ramsey(cfg);
        double f_contrast = crosstalk::fidelity_from_contrast(ram.contrast[0]);

        auto ops = lindblad::weak_probe_ops_for(probe, {});
        Matrix rho0 = lindblad::pure_state(4, 2);
        Matrix rho = lindblad::evolve(rho0, Matrix::Zero(4, 4), ops, tau);
        double f_direct = crosstalk::uhlmann_fidelity(rho0, rho);
        worst = std::max(worst, std::abs(f_contrast - f_direct));
    }
    detail = "max |F_contrast - F_uhlmann| = " + fmt(worst) + " over 50 probes (limit 1e-3)";
    return worst < 1e-3;
}

// 3. Fig. 1c headline numbers at I_X = 8e-5
bool c3_fig1c(std::string& detail) {
    cli::Scenario s;
    s.experiment = "fig1c";
    s.sweep = {{"ix", {cli::json(8e-5)}}};
    auto result = cli::run_scenario(s);
    if (result.table.rows.size() != 1) {
        detail = "fig1c run failed";
        return false;
    }
    double p_reset = result.table.rows[0][1];
    double p_det = result.table.rows[0][2];
    detail = "P_AQM(detect,11us) = " + fmt(p_det) + " (< 4e-3), P_AQM(reset) = " + fmt(p_reset) +
             " (< 1e-3), both > 1e-4";
    return p_det < 4e-3 && p_det > 1e-4 && p_reset < 1e-3 && p_reset > 1e-4;
}

// 4. inter-ion scattering intensities and P* floors
bool c4_interion(std::string& detail) {
    crosstalk::ChainGeometry chain;  // 6 um, B perpendicular
    crosstalk::InterIonOptions opts;
    double i_det = crosstalk::interion_intensity(chain, crosstalk::Process::Detection,
                                                 opts.gamma_sc_detection);
    double i_rst =
        crosstalk::interion_intensity(chain, crosstalk::Process::Reset, opts.gamma_sc_reset);
    double p_det = crosstalk::p_aqm_star(chain, crosstalk::Process::Detection, 11e-6);
    double p_rst = crosstalk::p_aqm_star(chain, crosstalk::Process::Reset, 9.73e-6);
    detail = "I_ab(det) = " + fmt(i_det) + " I_sat, I_ab(reset) = " + fmt(i_rst) +
             " I_sat; P*(det,11us) = " + fmt(p_det) + ", P*(reset) = " + fmt(p_rst) +
             " (all within 20%)";
    auto within = [](double v, double ref) { return std::abs(v - ref) <= 0.2 * ref; };
    return within(i_det, 9.5e-6) && within(i_rst, 1.3e-6) && within(p_det, 2e-4) &&
           within(p_rst, 1e-5);
}

// 5. reset optimum structure (Fig. 3b/3c)
bool c5_reset_structure(std::string& detail) {
    auto op = protocols::reset_time(ProbeBeam::reset(1.25, 0.86, 1.0));
    bool tau_ok = std::abs(op.tau_op - 9.73e-6) <= 0.30 * 9.73e-6;

    bool increasing = true;
    double prev = 0;
    for (double pf : {0.1, 0.4, 0.7, 0.86, 0.93}) {
        double t = protocols::reset_time(ProbeBeam::reset(1.25, pf, 1.0)).tau_op;
        increasing = increasing && t > prev;
        prev = t;
    }

    auto asset_f = [](double pi_frac, double i11) {
        ProbeBeam process = ProbeBeam::reset(1.25, pi_frac, i11);
        double tau = protocols::reset_time(process).tau_op;
        ProbeBeam leaked = process;
        leaked.intensity_sat = 5e-5 * 1.25;
        double gamma = lindblad::weak_probe_gamma(leaked, {}).total;
        return crosstalk::fidelity_from_T2(tau, 2.0 / gamma);
    };
    bool f_up = true;
    prev = 0;
    for (double pf : {0.3, 0.5, 0.7, 0.86}) {
        double f = asset_f(pf, 1.0);
        f_up = f_up && f > prev;
        prev = f;
    }
    bool f_down = true;
    prev = 2;
    for (double pf : {0.1, 0.3, 0.5, 0.7}) {
        double f = asset_f(pf, 0.5);
        f_down = f_down && f < prev;
        prev = f;
    }
    detail = "tau_op = " + fmt(op.tau_op * 1e6) + " us (9.73 +- 30%); tau_op(Ipi) increasing: " +
             (increasing ? "yes" : "no") + "; F up at I11=1: " + (f_up ? "yes" : "no") +
             "; F down at I11=0.5: " + (f_down ? "yes" : "no");
    return tau_ok && increasing && f_up && f_down;
}

// 6. detection optimum (Fig. 4d/4e)
bool c6_detection_optimum(std::string& detail) {
    detection::DetectionModel m;  // eps = 4% default
    double gamma = lindblad::weak_probe_gamma(ProbeBeam::detection(5e-5, 1.0 / 3), {}).total;
    auto opt = detection::optimal_detection_time(m, gamma);
    bool band = opt.tau >= 7.5e-6 && opt.tau <= 9.5e-6 && opt.unimodal;

    bool decreasing = true;
    double prev = 1.0;
    for (double eps : {0.01, 0.0325, 0.055, 0.0775, 0.10}) {
        detection::DetectionModel v = m;
        v.efficiency = eps;
        double tau = detection::optimal_detection_time(v, gamma).tau;
        decreasing = decreasing && tau < prev;
        prev = tau;
    }
    detail = "tau_opt = " + fmt(opt.tau * 1e6) + " us (8.5 +- 1.0); decreasing in efficiency: " +
             (decreasing ? "yes" : "no");
    return band && decreasing;
}

// 7. detection statistics vs the Monte-Carlo telegraph oracle
bool c7_detection_mc(std::string& detail) {
    // The closed forms keep a single bright/dark switch; the exact telegraph
    // oracle differs from them by at most ~ (R_d t)(R_b t)/2 (a second switch
    // followed by a changed detection record). That analytic truncation bound
    // is granted on top of the 3 sigma statistical tolerance.
    Rng rng(777);
    double worst_excess = -1e9, worst_pull = 0;
    for (int set = 0; set < 20; ++set) {
        detection::DetectionModel m;
        m.r_bright = 8e6 + rng.uniform() * 3e7;
        m.efficiency = 0.02 + rng.uniform() * 0.06;
        double t = 5e-6 + rng.uniform() * 10e-6;
        m.r_dark_pump = rng.uniform() * 0.02 / t;
        m.r_bright_pump = rng.uniform() * 0.02 / t;
        m.r_background = rng.uniform() * 0.05 / t;
        double truncation = 0.5 * (m.r_dark_pump * t) * (m.r_bright_pump * t);
        auto bright =
            detection::telegraph_no_photon_probability(m, t, true, 1000000, 1000 + 2 * set);
        auto dark =
            detection::telegraph_no_photon_probability(m, t, false, 1000000, 1001 + 2 * set);
        double db = std::abs(bright.p - detection::p_no_photon_bright(m, t));
        double dd = std::abs(dark.p - detection::p_no_photon_dark(m, t));
        worst_pull = std::max({worst_pull, db / bright.sigma, dd / dark.sigma});
        worst_excess = std::max({worst_excess, (db - truncation) / bright.sigma,
                                 (dd - truncation) / dark.sigma});
    }
    detail = "worst pull net of the one-switch truncation bound = " + fmt(worst_excess) +
             " sigma (limit 3; raw worst " + fmt(worst_pull) + ")";
    return worst_excess < 3.0;
}

// 8. worst-case asset state at theta = 0 (Fig. S4)
bool c8_worst_case(std::string& detail) {
    std::vector<double> thetas;
    for (int i = 0; i <= 16; ++i) thetas.push_back(kPi * i / 16);
    bool ok = true;
    for (auto probe :
         {ProbeBeam::detection(5e-5, 1.0 / 3), ProbeBeam::reset(5e-5, 0.86, 1.0)}) {
        auto f = crosstalk::bloch_angle_scan(thetas, probe, 11e-6);
        std::size_t argmin = 0;
        for (std::size_t i = 0; i < f.size(); ++i)
            if (f[i] < f[argmin]) argmin = i;
        ok = ok && argmin == 0;
    }
    detail = std::string("argmin F(theta) at theta=0 for detection and reset probes: ") +
             (ok ? "yes" : "no");
    return ok;
}

// 9. holography: 4/pi power gain, IFTA crosstalk, Parseval
bool c9_holography(std::string& detail) {
    Rng rng(31);
    fft::Grid g(512, 512);
    for (auto& z : g.data) z = {rng.normal(), rng.normal()};
    double e0 = g.energy();
    double parseval = std::abs(holography::propagate(g).energy() - e0) / e0;

    auto pupil = holography::make_gaussian_pupil(1024, 32e-6, 369.5e-9, 1.5e-6);
    holography::TargetField target;
    target.offset = 4 * 1.5e-6;
    holography::IftaOptions opts;
    opts.binary_refinements = 12;
    opts.refinement_damping = 0.8;
    auto scaled = holography::ifta_generate(target, pupil, 20, opts);
    holography::TargetField unit = target;
    unit.scale = 1.0;
    auto plain = holography::ifta_generate(unit, pupil, 20, opts);
    double ratio = scaled.signal_power / plain.signal_power;

    detail = "power gain = " + fmt(ratio) + " (1.62 +- 0.05); crosstalk(4w) = " +
             fmt(scaled.crosstalk) + " (<= 1e-4); Parseval = " + fmt(parseval) + " (<= 1e-10)";
    return std::abs(ratio - 1.62) <= 0.05 && scaled.crosstalk <= 1e-4 && parseval <= 1e-10;
}

// 10. phase-sensing closed loop over [-pi, pi)
bool c10_phase_sensing(std::string& detail) {
    auto pupil = holography::make_gaussian_pupil(256, 32e-6, 369.5e-9, 1.5e-6);
    holography::PupilPatch a{-0.35, 0.0, 0.12};
    holography::PupilPatch b{0.35, 0.0, 0.12};
    std::vector<double> grid;
    for (int i = 0; i < 16; ++i) grid.push_back(kTwoPi * i / 16);
    const int n = pupil.size();
    const double r_na_px = pupil.focal_length * pupil.na / pupil.pitch();

    double worst = 0;
    for (int k = 0; k < 8; ++k) {
        double inject = -kPi + kTwoPi * k / 8.0;
        holography::PupilField p2 = pupil;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                double ux = (c - n / 2) / r_na_px, uy = (r - n / 2) / r_na_px;
                double dx = ux - b.center_x, dy = uy - b.center_y;
                if (dx * dx + dy * dy <= b.radius * b.radius) p2.phase.at(r, c) += inject;
            }
        auto got = holography::simulate_phase_sensing(p2, a, b, grid);
        worst = std::max(worst, std::abs(std::remainder(got.phase - inject, kTwoPi)));
    }
    detail = "max phase recovery error " + fmt(worst) + " rad over [-pi,pi) (limit 0.05)";
    return worst < 0.05;
}

// 11. Ramsey-decay fit round trip and seeded bootstrap
bool c11_fits(std::string& detail) {
    double t2 = 1.2e-3, gamma = 2.0 / t2, duw = kTwoPi * 10e3;
    std::vector<std::pair<double, double>> data;
    for (int i = 0; i < 120; ++i) {
        double t = 10e-6 + (2.2 * t2 - 10e-6) * i / 119.0;
        data.push_back({t, lindblad::analytic_ramsey_rho22(gamma, duw, t)});
    }
    auto fit = analysis::fit_ramsey_decay(data);
    double t2_err = std::abs(fit.param("T2") / t2 - 1.0);

    Rng rng(6);
    std::vector<std::vector<double>> gauss;
    double s = 0.8;
    for (int i = 0; i < 200; ++i) gauss.push_back({s * rng.normal()});
    auto mean = [](const std::vector<std::vector<double>>& rows) {
        double acc = 0;
        for (auto& r : rows) acc += r[0];
        return acc / double(rows.size());
    };
    double b1 = analysis::bootstrap(gauss, mean, 20, 99);
    double b2 = analysis::bootstrap(gauss, mean, 20, 99);
    bool deterministic = b1 == b2;
    double b_large = analysis::bootstrap(gauss, mean, 400, 100);
    double analytic = s / std::sqrt(200.0);
    double boot_err = std::abs(b_large / analytic - 1.0);

    detail = "T2 recovery error " + fmt(t2_err * 100) + "% (limit 2%); bootstrap deterministic: " +
             (deterministic ? "yes" : "no") + ", vs analytic SE " + fmt(boot_err * 100) +
             "% (limit 30%)";
    return t2_err < 0.02 && deterministic && boot_err < 0.30;
}

// 12. density-matrix hygiene across representative integrations
bool c12_hygiene(std::string& detail) {
    double worst_trace = 0, worst_herm = 0, worst_eig = 0;
    auto check = [&](const Matrix& rho) {
        worst_trace = std::max(worst_trace, lindblad::trace_error(rho));
        worst_herm = std::max(worst_herm, lindblad::hermiticity_error(rho));
        worst_eig = std::max(worst_eig, -lindblad::min_eigenvalue(rho));
    };

    // full 8-level reset and detection
    for (auto probe : {ProbeBeam::reset(1.25, 0.86, 1.0), ProbeBeam::detection(1.0)}) {
        auto run = protocols::simulate_reset(lindblad::pure_state(8, 2), probe, 10e-6, {}, {}, 40);
        check(run.rho);
        auto eng = lindblad::make_engine({}, &probe, nullptr, {});
        auto samples = lindblad::evolve_sampled(lindblad::pure_state(8, 2), eng.hamiltonian,
                                                eng.collapse_ops, {1e-6, 3e-6, 8e-6});
        for (const auto& rho : samples) check(rho);
    }
    // weak-probe Ramsey chain
    protocols::RamseyConfig cfg;
    cfg.probe = ProbeBeam::detection(3e-4, 0.5);
    double gamma = lindblad::weak_probe_gamma(cfg.probe, {}).total;
    cfg.wait_grid = {0.3 / gamma, 1.0 / gamma, 2.5 / gamma};
    auto ram = protocols::simulate_ramsey(cfg);
    (void)ram;
    // microwave-driven evolution
    lindblad::MicrowaveDrive mw;
    mw.rabi = kTwoPi * 40e3;
    Matrix h = lindblad::build_hamiltonian({}, nullptr, &mw, {});
    check(lindblad::evolve(lindblad::pure_state(8, 0), h, lindblad::spontaneous_collapse_ops({}, {}),
                           30e-6));

    detail = "max |tr-1| = " + fmt(worst_trace) + " (<1e-9), hermiticity = " + fmt(worst_herm) +
             " (<1e-10), -min eig = " + fmt(worst_eig) + " (<1e-9)";
    return worst_trace < 1e-9 && worst_herm < 1e-10 && worst_eig < 1e-9;
}

}  // namespace

int main() {
    std::printf("acceptance suite: %d worker threads\n", max_threads());
    std::vector<Criterion> criteria = {
        {"1. analytic-chain equivalence (fidelity, contrast, readout)", 10, c1_analytic_chain},
        {"2. contrast-vs-Uhlmann fidelity consistency", 120, c2_eq1_vs_eq2},
        {"3. Fig. 1c headline AQM probabilities", 60, c3_fig1c},
        {"4. inter-ion scattering intensities and P* floors", 0, c4_interion},
        {"5. reset optimum structure (Fig. 3b/3c)", 0, c5_reset_structure},
        {"6. detection optimum (Fig. 4d/4e)", 0, c6_detection_optimum},
        {"7. detection statistics vs Monte-Carlo oracle", 120, c7_detection_mc},
        {"8. worst-case Bloch angle (Fig. S4)", 0, c8_worst_case},
        {"9. holography: 4/pi gain, crosstalk, Parseval", 0, c9_holography},
        {"10. phase-sensing closed loop", 0, c10_phase_sensing},
        {"11. Ramsey-decay fit and bootstrap round trips", 0, c11_fits},
        {"12. density-matrix hygiene", 0, c12_hygiene},
    };
    for (const auto& c : criteria) run_criterion(c);
    if (g_failures == 0)
        std::printf("all %zu criteria passed\n", criteria.size());
    else
        std::printf("%d criteria FAILED\n", g_failures);
    return g_failures;
}
