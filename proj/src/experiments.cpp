#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "aqm/crosstalk.hpp"
#include "aqm/detection.hpp"
#include "aqm/gridio.hpp"
#include "aqm/holography.hpp"
#include "aqm/protocols.hpp"
#include "aqm/rng.hpp"
#include "aqm/scenario.hpp"

namespace aqm::cli {

namespace {

using crosstalk::Process;
using lindblad::ProbeBeam;

struct ExperimentDef {
    std::string name;
    std::string description;
    json defaults;
    std::vector<SweepAxis> default_sweep;
    std::vector<std::string> columns;
    // per-row runner; reads swept values from the resolved params
    std::function<std::vector<double>(const json&, std::uint64_t)> row;
    // whole-table runner for sequential experiments (used when no sweep given)
    std::function<Table(const json&, std::uint64_t, ExecMode, json&)> bulk;
};

std::vector<json> log_grid(double lo, double hi, int n) {
    std::vector<json> g;
    for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
    return g;
}

std::vector<json> lin_grid(double lo, double hi, int n) {
    std::vector<json> g;
    for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
    return g;
}

ProbeBeam probe_from(const json& p) {
    ProbeBeam b;
    b.intensity_sat = p.at("intensity_sat").get<double>();
    b.pi_fraction = p.at("pi_fraction").get<double>();
    b.sigma_plus_fraction = p.at("sigma_plus_fraction").get<double>();
    b.sigma_minus_fraction = p.at("sigma_minus_fraction").get<double>();
    b.d1_11_fraction = p.at("d1_11_fraction").get<double>();
    b.validate();
    return b;
}

json probe_json(double intensity, double pi_frac, double d11_frac) {
    return json{{"intensity_sat", intensity},
                {"pi_fraction", pi_frac},
                {"sigma_plus_fraction", (1 - pi_frac) / 2},
                {"sigma_minus_fraction", (1 - pi_frac) / 2},
                {"d1_11_fraction", d11_frac}};
}

detection::DetectionModel detection_model_from(const json& p) {
    detection::DetectionModel m;
    m.r_bright = p.at("r_bright").get<double>();
    m.r_dark_pump = p.at("r_dark_pump").get<double>();
    m.r_bright_pump = p.at("r_bright_pump").get<double>();
    m.r_background = p.at("r_background").get<double>();
    m.efficiency = p.at("efficiency").get<double>();
    m.validate();
    return m;
}

json detection_model_json() {
    detection::DetectionModel m;
    return json{{"r_bright", m.r_bright},
                {"r_dark_pump", m.r_dark_pump},
                {"r_bright_pump", m.r_bright_pump},
                {"r_background", m.r_background},
                {"efficiency", m.efficiency}};
}

// asset fidelity after an exposure tau under a leaked probe
double asset_fidelity(const ProbeBeam& leaked, double tau) {
    double gamma = lindblad::weak_probe_gamma(leaked, {}).total;
    if (gamma <= 0) return 1.0;
    return crosstalk::fidelity_from_T2(tau, 2.0 / gamma);
}

// ---- fig1c ---------------------------------------------------------------

ExperimentDef make_fig1c() {
    ExperimentDef e;
    e.name = "fig1c";
    e.description = "Fig. 1c: P_AQM of the asset vs intensity crosstalk for an 11 us detection "
                    "and a full reset, with the inter-ion scattering band over B-field angles";
    e.defaults = {
        {"ix", 1e-4},
        {"i2", 1.0},
        {"chain", {{"spacing", 6e-6}, {"b_field_angle", kPi / 2}}},
        {"detection", {{"tau", 11e-6}, {"pi_fraction", 1.0 / 3}}},
        {"reset", {{"pi_fraction", 0.86}, {"d1_11_fraction", 1.0}}},
        {"band_angles", 16},
    };
    e.default_sweep = {{"ix", log_grid(1e-6, 1e-2, 25)}};
    e.columns = {"I_X", "P_AQM_reset", "P_AQM_detect_11us", "P_star_band_lo", "P_star_band_hi"};
    e.row = [](const json& p, std::uint64_t) {
        double ix = p.at("ix").get<double>();
        double i2 = p.at("i2").get<double>();
        double tau_d = p.at("detection").at("tau").get<double>();

        ProbeBeam det = ProbeBeam::detection(ix * i2, p.at("detection").at("pi_fraction").get<double>());
        double gamma_det = lindblad::weak_probe_gamma(det, {}).total;
        double p_det = 1.0 - std::exp(-gamma_det * tau_d / 3.0);

        ProbeBeam reset_process = ProbeBeam::reset(i2, p.at("reset").at("pi_fraction").get<double>(),
                                                   p.at("reset").at("d1_11_fraction").get<double>());
        double tau_op = protocols::reset_time(reset_process).tau_op;
        ProbeBeam reset_leak = reset_process;
        reset_leak.intensity_sat = ix * i2;
        double gamma_rst = lindblad::weak_probe_gamma(reset_leak, {}).total;
        double p_rst = 1.0 - std::exp(-gamma_rst * tau_op / 3.0);

        crosstalk::ChainGeometry chain;
        chain.spacing = p.at("chain").at("spacing").get<double>();
        int n_angles = p.at("band_angles").get<int>();
        double lo = 1.0, hi = 0.0;
        for (int i = 0; i < n_angles; ++i) {
            chain.b_field_angle = kPi / 2 * i / (n_angles - 1);
            for (auto process : {Process::Detection, Process::Reset}) {
                double tau = process == Process::Detection ? tau_d : tau_op;
                double star = crosstalk::p_aqm_star(chain, process, tau);
                if (star > 0) lo = std::min(lo, star);
                hi = std::max(hi, star);
            }
        }
        return std::vector<double>{ix, p_rst, p_det, lo, hi};
    };
    return e;
}

// ---- fig2b ---------------------------------------------------------------

ExperimentDef make_fig2b() {
    ExperimentDef e;
    e.name = "fig2b";
    e.description = "Fig. 2b: Ramsey fringe contrast decay of the asset under leaked detection "
                    "light; case B is the single-ion configuration, case A adds the photons "
                    "scattered by the probed neighbor";
    json probe = probe_json(1.25, 0.6, 0.0);
    e.defaults = {
        {"ix", 3.4e-5},
        {"probe", probe},
        {"case_a", false},
        {"chain", {{"spacing", 9e-6}, {"b_field_angle", kPi / 2}}},
        {"detuning_uw", kTwoPi * 10e3},
        {"repetitions", 200},
        {"shot_noise", false},
    };
    e.columns = {"T", "p_up", "contrast"};
    e.bulk = [](const json& p, std::uint64_t seed, ExecMode, json& extra) {
        protocols::RamseyConfig cfg;
        ProbeBeam process = probe_from(p.at("probe"));
        cfg.probe = process;
        cfg.probe.intensity_sat = p.at("ix").get<double>() * process.intensity_sat;
        if (p.at("case_a").get<bool>()) {
            // the neighbor scatters resonant photons; their effective intensity
            // joins the active detection component at the asset
            crosstalk::ChainGeometry chain;
            chain.spacing = p.at("chain").at("spacing").get<double>();
            chain.b_field_angle = p.at("chain").at("b_field_angle").get<double>();
            crosstalk::InterIonOptions opts;
            double i_ab = crosstalk::interion_intensity(chain, crosstalk::Process::Detection,
                                                        opts.gamma_sc_detection *
                                                            process.intensity_sat);
            // pi-polarized detection-branch light: fold into the probe budget
            double add = i_ab / std::max(cfg.probe.pi_fraction *
                                             (1.0 - cfg.probe.d1_11_fraction), 1e-12);
            cfg.probe.intensity_sat += add;
            extra["interion_intensity"] = i_ab;
        }
        cfg.detuning_uw = p.at("detuning_uw").get<double>();
        cfg.repetitions = p.at("repetitions").get<int>();
        cfg.shot_noise = p.at("shot_noise").get<bool>();
        cfg.seed = seed;
        double gamma = lindblad::weak_probe_gamma(cfg.probe, {}).total;
        if (gamma <= 0) throw std::runtime_error("fig2b: probe has no AQM channel");
        cfg.wait_grid = protocols::sample_wait_grid(2.0 / gamma);
        auto out = protocols::simulate_ramsey(cfg);
        Table t;
        t.columns = {"T", "p_up", "contrast"};
        for (std::size_t i = 0; i < out.wait.size(); ++i)
            t.rows.push_back({out.wait[i], out.p_up[i], out.contrast[i]});
        extra["t2_star"] = out.t2_star;
        extra["t2_star_err"] = out.t2_star_err;
        extra["fidelity_at_11us"] = crosstalk::fidelity_from_T2(11e-6, out.t2_star);
        return t;
    };
    return e;
}

// ---- fig3b ---------------------------------------------------------------

ExperimentDef make_fig3b() {
    ExperimentDef e;
    e.name = "fig3b";
    e.description = "Fig. 3b: asset fidelity for state reset vs spectral purity I11/I and "
                    "polarization Ipi/I, with the reset time per point";
    e.defaults = {
        {"ix", 5e-5},
        {"i2", 1.25},
        {"i11_frac", 1.0},
        {"pi_frac", 0.5},
    };
    e.default_sweep = {{"i11_frac", {json(0.5), json(0.75), json(1.0)}},
                       {"pi_frac", lin_grid(0.05, 0.95, 10)}};
    e.columns = {"I11_frac", "Ipi_frac", "F_asset", "tau_op"};
    e.row = [](const json& p, std::uint64_t) {
        double i11 = p.at("i11_frac").get<double>();
        double pi_frac = p.at("pi_frac").get<double>();
        double i2 = p.at("i2").get<double>();
        double ix = p.at("ix").get<double>();
        ProbeBeam process = ProbeBeam::reset(i2, pi_frac, i11);
        double tau_op = protocols::reset_time(process).tau_op;
        ProbeBeam leaked = process;
        leaked.intensity_sat = ix * i2;
        return std::vector<double>{i11, pi_frac, asset_fidelity(leaked, tau_op), tau_op};
    };
    return e;
}

// ---- fig3c / fig4b: fidelity vs beam offset ------------------------------

ExperimentDef make_offset_scan(const std::string& name, const std::string& description,
                               bool detection_process) {
    ExperimentDef e;
    e.name = name;
    e.description = description;
    e.defaults = {
        {"d_over_w", 4.0},
        {"i2", 1.25},
        {"beam", {{"waist", 1.5e-6}, {"na", 0.16}}},
        {"pi_frac", detection_process ? 0.6 : 0.86},
        {"tau", 11e-6},  // detection exposure; reset uses its own tau_op
    };
    e.default_sweep = {{"d_over_w", lin_grid(0.0, 8.0, 17)}};
    e.columns = {"d_over_w", "I_X", detection_process ? "F_detection" : "F_reset"};
    e.row = [detection_process](const json& p, std::uint64_t) {
        double dw = p.at("d_over_w").get<double>();
        double i2 = p.at("i2").get<double>();
        crosstalk::BeamGeometry geom;
        geom.waist = p.at("beam").at("waist").get<double>();
        geom.na = p.at("beam").at("na").get<double>();
        geom.offset = dw * geom.waist;
        double ix = crosstalk::psf_crosstalk(geom);

        double pi_frac = p.at("pi_frac").get<double>();
        ProbeBeam process = detection_process ? ProbeBeam::detection(i2, pi_frac)
                                              : ProbeBeam::reset(i2, pi_frac, 1.0);
        double tau = detection_process ? p.at("tau").get<double>()
                                       : protocols::reset_time(process).tau_op;
        ProbeBeam leaked = process;
        leaked.intensity_sat = ix * i2;
        return std::vector<double>{dw, ix, asset_fidelity(leaked, tau)};
    };
    return e;
}

// ---- fig4a ---------------------------------------------------------------

ExperimentDef make_fig4a() {
    ExperimentDef e;
    e.name = "fig4a";
    e.description = "Fig. 4a: asset fidelity vs polarization of the detection probe (maximal "
                    "with no pi light)";
    e.defaults = {
        {"pi_frac", 0.6},
        {"ix", 5e-5},
        {"i2", 1.25},
        {"tau", 11e-6},
    };
    e.default_sweep = {{"pi_frac", lin_grid(0.0, 1.0, 21)}};
    e.columns = {"Ipi_frac", "F_detection"};
    e.row = [](const json& p, std::uint64_t) {
        double pi_frac = p.at("pi_frac").get<double>();
        ProbeBeam leaked =
            ProbeBeam::detection(p.at("ix").get<double>() * p.at("i2").get<double>(), pi_frac);
        return std::vector<double>{pi_frac, asset_fidelity(leaked, p.at("tau").get<double>())};
    };
    return e;
}

// ---- fig4d ---------------------------------------------------------------

ExperimentDef make_fig4d() {
    ExperimentDef e;
    e.name = "fig4d";
    e.description = "Fig. 4d: process detection fidelity and asset fidelity vs detection time; "
                    "the product peaks at the optimal tau_d";
    e.defaults = {
        {"detection_model", detection_model_json()},
        {"ix", 5e-5},
        {"i2", 1.0},
        {"pi_frac", 1.0 / 3},
        {"first_photon_halving", true},
        {"tau_grid", {{"lo", 5e-7}, {"hi", 3e-5}, {"points", 60}}},
    };
    e.columns = {"tau_d", "F_process_detection", "F_asset", "product"};
    e.bulk = [](const json& p, std::uint64_t, ExecMode, json& extra) {
        auto m = detection_model_from(p.at("detection_model"));
        ProbeBeam leaked =
            ProbeBeam::detection(p.at("ix").get<double>() * p.at("i2").get<double>(),
                                 p.at("pi_frac").get<double>());
        double gamma = lindblad::weak_probe_gamma(leaked, {}).total;
        bool halving = p.at("first_photon_halving").get<bool>();

        Table t;
        t.columns = {"tau_d", "F_process_detection", "F_asset", "product"};
        double lo = p.at("tau_grid").at("lo").get<double>();
        double hi = p.at("tau_grid").at("hi").get<double>();
        int n = p.at("tau_grid").at("points").get<int>();
        for (int i = 0; i < n; ++i) {
            double tau = lo + (hi - lo) * i / (n - 1);
            double f_det = detection::avg_detection_fidelity(m, tau);
            double exposure = halving ? detection::first_photon_halving(tau) : tau;
            double f_asset = gamma > 0 ? crosstalk::fidelity_from_T2(exposure, 2.0 / gamma) : 1.0;
            t.rows.push_back({tau, f_det, f_asset, f_det * f_asset});
        }
        detection::OptimalTimeOptions oto;
        oto.first_photon_halving = halving;
        auto opt = detection::optimal_detection_time(m, gamma, oto);
        extra["optimal_tau_d"] = opt.tau;
        extra["unimodal"] = opt.unimodal;
        return t;
    };
    return e;
}

// ---- fig4e ---------------------------------------------------------------

ExperimentDef make_fig4e() {
    ExperimentDef e;
    e.name = "fig4e";
    e.description = "Fig. 4e: optimal detection time vs net detection efficiency";
    e.defaults = {
        {"detection_model", detection_model_json()},
        {"ix", 5e-5},
        {"i2", 1.0},
        {"pi_frac", 1.0 / 3},
        {"efficiency", 0.04},
        {"first_photon_halving", true},
    };
    e.default_sweep = {{"efficiency", lin_grid(0.01, 0.10, 19)}};
    e.columns = {"efficiency", "optimal_tau_d"};
    e.row = [](const json& p, std::uint64_t) {
        auto m = detection_model_from(p.at("detection_model"));
        m.efficiency = p.at("efficiency").get<double>();
        ProbeBeam leaked =
            ProbeBeam::detection(p.at("ix").get<double>() * p.at("i2").get<double>(),
                                 p.at("pi_frac").get<double>());
        double gamma = lindblad::weak_probe_gamma(leaked, {}).total;
        detection::OptimalTimeOptions oto;
        oto.first_photon_halving = p.at("first_photon_halving").get<bool>();
        auto opt = detection::optimal_detection_time(m, gamma, oto);
        return std::vector<double>{m.efficiency, opt.tau};
    };
    return e;
}

// ---- figS4 ---------------------------------------------------------------

ExperimentDef make_figs4() {
    ExperimentDef e;
    e.name = "figS4";
    e.description = "Fig. S4: infidelity vs Bloch angle of the asset state under weak detection "
                    "light; theta = 0 (the up state) is the worst case";
    e.defaults = {
        {"intensity", 5e-5},
        {"pi_frac", 1.0 / 3},
        {"tau", 11e-6},
        {"theta", 0.0},
    };
    e.default_sweep = {{"theta", lin_grid(0.0, kPi, 33)}};
    e.columns = {"theta", "infidelity", "ramsey_infidelity"};
    e.row = [](const json& p, std::uint64_t) {
        double theta = p.at("theta").get<double>();
        ProbeBeam probe = ProbeBeam::detection(p.at("intensity").get<double>(),
                                               p.at("pi_frac").get<double>());
        double tau = p.at("tau").get<double>();
        double f = crosstalk::bloch_angle_scan({theta}, probe, tau)[0];
        double gamma = lindblad::weak_probe_gamma(probe, {}).total;
        double f_ramsey =
            crosstalk::fidelity_from_contrast(std::exp(-gamma * tau / 2.0));
        return std::vector<double>{theta, 1.0 - f, 1.0 - f_ramsey};
    };
    return e;
}

// ---- hologram -------------------------------------------------------------

ExperimentDef make_hologram() {
    ExperimentDef e;
    e.name = "hologram";
    e.description = "Fig. 1a wavefront engineering: IFTA binary hologram for a shifted Gaussian "
                    "target through an (optionally aberrated) pupil; writes hologram.pbm";
    e.defaults = {
        {"grid", 1024},
        {"pitch", 32e-6},
        {"wavelength", 369.5e-9},
        {"waist", 1.5e-6},
        {"na", 0.16},
        {"offset_waists", 4.0},
        {"iterations", 20},
        {"binary_refinements", 8},
        {"aberration_amplitude", 0.0},
        {"scale_4_over_pi", true},
        {"output_dir", ""},
    };
    e.columns = {"iteration", "window_error"};
    e.bulk = [](const json& p, std::uint64_t seed, ExecMode mode, json& extra) {
        int n = p.at("grid").get<int>();
        auto pupil = holography::make_gaussian_pupil(
            n, p.at("pitch").get<double>(), p.at("wavelength").get<double>(),
            p.at("waist").get<double>(), p.at("na").get<double>());
        double ab = p.at("aberration_amplitude").get<double>();
        if (ab > 0) {
            Rng rng(seed);
            double f1 = 1.5 + 2.0 * rng.uniform(), f2 = 1.5 + 2.0 * rng.uniform();
            double ph1 = kTwoPi * rng.uniform(), ph2 = kTwoPi * rng.uniform();
            const double r_na = pupil.focal_length * pupil.na;
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) {
                    double x = (c - n / 2) * pupil.pitch() / r_na;
                    double y = (r - n / 2) * pupil.pitch() / r_na;
                    pupil.phase.at(r, c) = ab * (std::sin(f1 * x * kPi + ph1) *
                                                     std::cos(f2 * y * kPi + ph2) +
                                                 0.5 * (x * x - y * y));
                }
        }
        holography::TargetField target;
        target.waist = p.at("waist").get<double>();
        target.offset = p.at("offset_waists").get<double>() * target.waist;
        target.scale = p.at("scale_4_over_pi").get<bool>() ? 4.0 / kPi : 1.0;
        holography::IftaOptions opts;
        opts.binary_refinements = p.at("binary_refinements").get<int>();
        opts.mode = mode;
        auto res = holography::ifta_generate(target, pupil, p.at("iterations").get<int>(), opts);

        Table t;
        t.columns = {"iteration", "window_error"};
        for (std::size_t i = 0; i < res.window_error.size(); ++i)
            t.rows.push_back({double(i), res.window_error[i]});
        extra["crosstalk_at_axis"] = res.crosstalk;
        extra["signal_power"] = res.signal_power;

        std::string dir = p.at("output_dir").get<std::string>();
        if (!dir.empty()) {
            gridio::write_pbm(dir + "/hologram.pbm", res.hologram);
            gridio::write_real_grid(dir + "/pupil_amplitude.grid", pupil.amplitude,
                                    "pupil amplitude");
            gridio::write_real_grid(dir + "/pupil_phase.grid", pupil.phase,
                                    "pupil aberration phase");
            extra["files"] = {"hologram.pbm", "pupil_amplitude.grid", "pupil_phase.grid"};
        }
        return t;
    };
    return e;
}

// ---- phase-sense ----------------------------------------------------------

ExperimentDef make_phase_sense() {
    ExperimentDef e;
    e.name = "phase-sense";
    e.description = "Fig. S6 aberration sensing: ion-sensor interference between two pupil "
                    "patches recovers injected phase differences";
    e.defaults = {
        {"grid", 256},
        {"patch_radius", 0.12},
        {"patch_sep", 0.7},
        {"phase_steps", 16},
        {"injected", 0.0},
    };
    std::vector<json> injected;
    for (int i = 0; i < 12; ++i) injected.push_back(-kPi + kTwoPi * i / 12.0);
    e.default_sweep = {{"injected", injected}};
    e.columns = {"injected_phase", "recovered_phase", "wrapped_error"};
    e.row = [](const json& p, std::uint64_t) {
        int n = p.at("grid").get<int>();
        auto pupil = holography::make_gaussian_pupil(n, 32e-6, 369.5e-9, 1.5e-6);
        double sep = p.at("patch_sep").get<double>();
        holography::PupilPatch a{-sep / 2, 0.0, p.at("patch_radius").get<double>()};
        holography::PupilPatch b{sep / 2, 0.0, p.at("patch_radius").get<double>()};
        std::vector<double> grid;
        int steps = p.at("phase_steps").get<int>();
        for (int i = 0; i < steps; ++i) grid.push_back(kTwoPi * i / steps);

        double injected = p.at("injected").get<double>();
        auto base = holography::simulate_phase_sensing(pupil, a, b, grid);
        const double r_na_px = pupil.focal_length * pupil.na / pupil.pitch();
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                double ux = (c - n / 2) / r_na_px, uy = (r - n / 2) / r_na_px;
                double dx = ux - b.center_x, dy = uy - b.center_y;
                if (dx * dx + dy * dy <= b.radius * b.radius)
                    pupil.phase.at(r, c) += injected;
            }
        auto got = holography::simulate_phase_sensing(pupil, a, b, grid);
        double recovered = got.phase - base.phase;
        double err = std::remainder(recovered - injected, kTwoPi);
        return std::vector<double>{injected, std::remainder(recovered, kTwoPi), err};
    };
    return e;
}

// ---- detection-mc ----------------------------------------------------------

ExperimentDef make_detection_mc() {
    ExperimentDef e;
    e.name = "detection-mc";
    e.description = "Fig. 4d detection statistics: closed-form no-photon probabilities vs the "
                    "Monte-Carlo telegraph oracle on randomized parameter sets";
    e.defaults = {
        {"trials", 200000},
        {"set_index", 0},
    };
    e.default_sweep = {{"set_index", lin_grid(0, 19, 20)}};
    e.columns = {"set_index",       "t",          "p0_bright_formula", "p0_bright_mc",
                 "sigma_bright",    "p0_dark_formula", "p0_dark_mc",   "sigma_dark"};
    e.row = [](const json& p, std::uint64_t seed) {
        int index = int(p.at("set_index").get<double>());
        long trials = p.at("trials").get<long>();
        Rng rng = Rng::stream(seed, std::uint64_t(index));
        detection::DetectionModel m;
        m.r_bright = 8e6 + rng.uniform() * 3e7;
        m.efficiency = 0.02 + rng.uniform() * 0.06;
        double t = 5e-6 + rng.uniform() * 10e-6;
        m.r_dark_pump = rng.uniform() * 0.02 / t;
        m.r_bright_pump = rng.uniform() * 0.02 / t;
        m.r_background = rng.uniform() * 0.05 / t;

        auto bright = detection::telegraph_no_photon_probability(m, t, true, trials,
                                                                 seed ^ 0x9e1ULL, ExecMode::Serial);
        auto dark = detection::telegraph_no_photon_probability(m, t, false, trials,
                                                               seed ^ 0x7c3ULL, ExecMode::Serial);
        return std::vector<double>{double(index),
                                   t,
                                   detection::p_no_photon_bright(m, t),
                                   bright.p,
                                   bright.sigma,
                                   detection::p_no_photon_dark(m, t),
                                   dark.p,
                                   dark.sigma};
    };
    return e;
}

const std::vector<ExperimentDef>& registry() {
    static const std::vector<ExperimentDef> defs = [] {
        std::vector<ExperimentDef> v;
        v.push_back(make_fig1c());
        v.push_back(make_fig2b());
        v.push_back(make_fig3b());
        v.push_back(make_offset_scan(
            "fig3c", "Fig. 3c: asset fidelity vs beam offset for the state-reset beam through "
                     "the diffraction-limited NA = 0.16 pupil", false));
        v.push_back(make_fig4a());
        v.push_back(make_offset_scan(
            "fig4b", "Fig. 4b: asset fidelity vs beam offset for 11 us detection light through "
                     "the diffraction-limited NA = 0.16 pupil", true));
        v.push_back(make_fig4d());
        v.push_back(make_fig4e());
        v.push_back(make_figs4());
        v.push_back(make_hologram());
        v.push_back(make_phase_sense());
        v.push_back(make_detection_mc());
        return v;
    }();
    return defs;
}

const ExperimentDef* find_experiment(const std::string& name) {
    for (const auto& e : registry())
        if (e.name == name) return &e;
    return nullptr;
}

json materialize_params(const json& defaults, const json& overrides, const std::string& prefix) {
    json out = defaults;
    std::vector<std::pair<std::string, const json*>> stack{{prefix, &overrides}};
    while (!stack.empty()) {
        auto [pfx, node] = stack.back();
        stack.pop_back();
        for (auto it = node->begin(); it != node->end(); ++it) {
            std::string path = pfx.empty() ? it.key() : pfx + "." + it.key();
            const json* dflt = json_find(out, path);
            if (!dflt) throw std::runtime_error("params." + path + ": no such parameter");
            if (it.value().is_object() && dflt->is_object())
                stack.push_back({path, &it.value()});
            else
                json_set(out, path, it.value());
        }
    }
    return out;
}

}  // namespace

bool experiment_exists(const std::string& name) { return find_experiment(name) != nullptr; }

const json& experiment_defaults(const std::string& name) {
    const ExperimentDef* def = find_experiment(name);
    if (!def) throw std::runtime_error("unknown experiment: " + name);
    return def->defaults;
}

std::vector<ExperimentInfo> list_experiments() {
    std::vector<ExperimentInfo> out;
    for (const auto& e : registry()) out.push_back({e.name, e.description});
    return out;
}

RunResult run_scenario(const Scenario& scenario, ExecMode mode, int workers) {
    const ExperimentDef* def = find_experiment(scenario.experiment);
    if (!def) throw std::runtime_error("unknown experiment: " + scenario.experiment);
    if (workers > 0) set_threads(workers);

    json params = materialize_params(def->defaults, scenario.params, "");
    const auto& sweep = scenario.sweep.empty() ? def->default_sweep : scenario.sweep;
    for (const auto& axis : sweep)
        if (!json_find(params, axis.path))
            throw std::runtime_error("sweep path '" + axis.path + "' does not exist");

    RunResult result;
    result.table.columns = def->columns;
    json extra = json::object();

    if (def->bulk && sweep.empty()) {
        result.table = def->bulk(params, scenario.seed, mode, extra);
    } else if (def->row) {
        // cartesian grid, axis 0 outermost; rows merged in grid order
        std::size_t total = 1;
        for (const auto& axis : sweep) total *= axis.values.size();
        std::vector<std::vector<double>> rows(total);
        std::vector<char> ok(total, 0);
        std::vector<std::string> errs(total);

        const bool parallel = mode == ExecMode::Parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
        for (long idx = 0; idx < long(total); ++idx) {
            json local = params;
            std::size_t rem = std::size_t(idx);
            for (std::size_t a = sweep.size(); a-- > 0;) {
                const auto& axis = sweep[a];
                json_set(local, axis.path, axis.values[rem % axis.values.size()]);
                rem /= axis.values.size();
            }
            try {
                rows[std::size_t(idx)] = def->row(local, scenario.seed);
                ok[std::size_t(idx)] = 1;
            } catch (const std::exception& ex) {
                errs[std::size_t(idx)] = ex.what();
            }
        }
        for (std::size_t i = 0; i < total; ++i) {
            if (ok[i])
                result.table.rows.push_back(std::move(rows[i]));
            else
                result.errors.push_back({i, errs[i]});
        }
    } else {
        throw std::runtime_error("experiment '" + scenario.experiment +
                                 "' does not support sweeps");
    }

    json sweep_doc = json::array();
    for (const auto& axis : sweep) {
        json values = json::array();
        for (const auto& v : axis.values) values.push_back(v);
        sweep_doc.push_back({{"path", axis.path}, {"grid", values}});
    }
    json canonical = {{"experiment", scenario.experiment},
                      {"seed", scenario.seed},
                      {"params", params},
                      {"sweep", sweep_doc}};
    result.metadata = {{"experiment", scenario.experiment},
                       {"description", def->description},
                       {"seed", scenario.seed},
                       {"config_hash", config_hash(canonical)},
                       {"columns", result.table.columns},
                       {"params", params},
                       {"sweep", sweep_doc},
                       {"tool", {{"name", "aqmsim"}, {"version", "0.1.0"}}},
                       {"extra", extra}};
    if (!result.errors.empty()) {
        json errdoc = json::array();
        for (const auto& e : result.errors)
            errdoc.push_back({{"row", e.index}, {"message", e.message}});
        result.metadata["row_errors"] = errdoc;
    }
    return result;
}

}  // namespace aqm::cli
