#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aqm/crosstalk.hpp"
#include "aqm/protocols.hpp"

using namespace aqm;
using namespace aqm::protocols;

TEST_CASE("wait grid follows the five-interval rule") {
    auto grid = sample_wait_grid(1e-3);
    CHECK(grid.size() == 105);
    CHECK(grid.front() == doctest::Approx(10e-6));
    CHECK(grid.back() <= 2e-3 + 1e-12);
    for (size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
    // each interval spans 200 us
    CHECK(grid[20] - grid[0] == doctest::Approx(200e-6));
    CHECK(grid[41] - grid[21] == doctest::Approx(200e-6));
    CHECK_THROWS_AS(sample_wait_grid(0.0), std::invalid_argument);
}

TEST_CASE("ramsey config validation") {
    RamseyConfig cfg;
    cfg.wait_grid = {2e-5, 1e-5};  // not increasing
    CHECK_THROWS_AS(simulate_ramsey(cfg), std::invalid_argument);
    cfg.wait_grid = {1e-5};
    cfg.repetitions = 0;
    CHECK_THROWS_AS(simulate_ramsey(cfg), std::invalid_argument);
    cfg = RamseyConfig{};
    cfg.wait_grid = {1e-5};
    cfg.probe = ProbeBeam::detection(0.5);  // beyond the weak regime
    CHECK_THROWS_AS(simulate_ramsey(cfg), std::invalid_argument);
}

TEST_CASE("ramsey: no probe gives unit contrast and 10 kHz fringes") {
    RamseyConfig cfg;
    cfg.wait_grid = {25e-6, 50e-6, 75e-6, 100e-6, 125e-6, 150e-6};
    auto out = simulate_ramsey(cfg);
    for (double c : out.contrast) CHECK(c == doctest::Approx(1.0).epsilon(1e-9));
    // P(up) oscillates at detuning/2pi = 10 kHz: period 100 us
    CHECK(out.p_up[1] == doctest::Approx(lindblad::analytic_ramsey_rho22(0, cfg.detuning_uw, 50e-6))
                             .epsilon(1e-9));
    CHECK(out.p_up[5] == doctest::Approx(out.p_up[1]).epsilon(1e-7));  // one full period later
}

TEST_CASE("ramsey: weak probe decay gives T2* = 2/gamma") {
    RamseyConfig cfg;
    cfg.probe = ProbeBeam::detection(4e-4, 1.0);  // pure pi detection light
    double gamma = lindblad::weak_probe_gamma(cfg.probe, cfg.params).total;
    double t2_expect = 2.0 / gamma;
    cfg.wait_grid = sample_wait_grid(t2_expect);
    auto out = simulate_ramsey(cfg);
    CHECK(out.t2_star == doctest::Approx(t2_expect).epsilon(0.02));
    // contrast samples equal the analytic exponential
    for (size_t i = 0; i < out.wait.size(); i += 20)
        CHECK(out.contrast[i] ==
              doctest::Approx(std::exp(-gamma * out.wait[i] / 2)).epsilon(1e-6));
}

TEST_CASE("ramsey contrast is monotone non-increasing in probe intensity") {
    double t = 400e-6;
    double prev = 2.0;
    for (double ix : {0.0, 1e-4, 3e-4, 1e-3}) {
        RamseyConfig cfg;
        cfg.probe = ProbeBeam::detection(ix);
        cfg.wait_grid = {t};
        auto out = simulate_ramsey(cfg);
        CHECK(out.contrast[0] < prev + 1e-12);
        prev = out.contrast[0];
    }
}

TEST_CASE("ramsey with shot noise is seeded and reproducible") {
    RamseyConfig cfg;
    cfg.probe = ProbeBeam::detection(2e-4);
    cfg.wait_grid = {50e-6, 150e-6, 250e-6};
    cfg.shot_noise = true;
    cfg.seed = 42;
    auto a = simulate_ramsey(cfg);
    auto b = simulate_ramsey(cfg);
    CHECK(a.p_up == b.p_up);
    CHECK(a.contrast == b.contrast);
}

TEST_CASE("finite-duration pulses approach the ideal-pulse limit") {
    RamseyConfig ideal;
    ideal.wait_grid = {40e-6, 90e-6};
    auto ref = simulate_ramsey(ideal);

    RamseyConfig finite = ideal;
    finite.ideal_pulses = false;
    finite.pulse_duration = 6e-6;  // the experimental pulse length
    auto slow = simulate_ramsey(finite);
    for (double c : slow.contrast) {
        CHECK(c > 0.9);
        CHECK(c <= 1.0 + 1e-9);
    }

    finite.pulse_duration = 0.2e-6;
    auto fast = simulate_ramsey(finite);
    for (size_t i = 0; i < ref.p_up.size(); ++i) {
        // detuning-induced pulse corrections scale with the pulse area error
        CHECK(std::abs(fast.p_up[i] - ref.p_up[i]) <
              std::abs(slow.p_up[i] - ref.p_up[i]) + 1e-6);
        CHECK(std::abs(fast.p_up[i] - ref.p_up[i]) < 0.02);
    }
}

TEST_CASE("wait grid falls back to a uniform span for short T2") {
    auto grid = sample_wait_grid(100e-6);  // intervals would overlap
    CHECK(grid.size() == 105);
    CHECK(grid.front() == doctest::Approx(10e-6));
    CHECK(grid.back() <= 2 * 100e-6 + 1e-12);
    for (size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}

TEST_CASE("reset pumps into the dark state") {
    ProbeBeam p = ProbeBeam::reset(1.25, 0.86, 1.0);
    auto rt = reset_time(p);
    auto run = simulate_reset(lindblad::pure_state(8, 2), p, rt.tau_op);
    CHECK(run.rho(0, 0).real() >= 0.999);  // 1 - e^{-7} by construction of tau_op

    // pure-pi D1(11) light cannot reset out of |2>
    ProbeBeam pi_only = ProbeBeam::reset(1.25, 1.0, 1.0);
    CHECK_THROWS_WITH_AS(reset_time(pi_only), doctest::Contains("no reset"), std::runtime_error);
    // only the far-off-resonant Raman channel moves population (few 1e-4 here)
    auto frozen = simulate_reset(lindblad::pure_state(8, 2), pi_only, 5e-6);
    CHECK(frozen.rho(2, 2).real() == doctest::Approx(1.0).epsilon(3e-3));

    // zero-duration reset returns the input state
    auto nothing = simulate_reset(lindblad::pure_state(8, 2), p, 0.0);
    CHECK(nothing.rho(2, 2).real() == doctest::Approx(1.0));
}

TEST_CASE("reset fidelity holds across polarization mixes") {
    for (double pf : {0.0, 0.45, 0.9}) {
        ProbeBeam p = ProbeBeam::reset(1.25, pf, 1.0);
        auto rt = reset_time(p);
        auto run = simulate_reset(lindblad::pure_state(8, 2), p, rt.tau_op);
        CHECK(run.rho(0, 0).real() >= 0.999);
    }
}

TEST_CASE("reset time at the paper's operating point") {
    ProbeBeam p = ProbeBeam::reset(1.25, 0.86, 1.0);
    auto rt = reset_time(p);
    CHECK(rt.tau_op == doctest::Approx(9.73e-6).epsilon(0.30));
    CHECK(rt.tau_op == doctest::Approx(7.0 * rt.t1).epsilon(1e-12));

    // strictly increasing in the pi fraction
    double prev = 0;
    for (double pf : {0.1, 0.4, 0.7, 0.86, 0.93}) {
        auto r = reset_time(ProbeBeam::reset(1.25, pf, 1.0));
        CHECK(r.tau_op > prev);
        prev = r.tau_op;
    }
}

TEST_CASE("doubling intensity halves the reset time in the weak regime") {
    auto slow = reset_time(ProbeBeam::reset(0.05, 0.5, 1.0));
    auto fast = reset_time(ProbeBeam::reset(0.10, 0.5, 1.0));
    CHECK(slow.tau_op / fast.tau_op == doctest::Approx(2.0).epsilon(0.10));
}

TEST_CASE("detection illumination") {
    // dark ion does not scatter
    ProbeBeam det = ProbeBeam::detection(1.0);
    lindblad::HamiltonianOptions opts;
    auto dark = simulate_detection_illumination(lindblad::pure_state(8, 0), det, 2e-6);
    CHECK(dark.rho(0, 0).real() == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(dark.scattering_rate.back() < 1e-3 * AtomicParams{}.gamma);

    // bright ion scatters below the two-level bound Gamma/2
    auto bright = simulate_detection_illumination(lindblad::pure_state(8, 2), det, 2e-6);
    double rate = bright.scattering_rate.back();
    CHECK(rate > 0.0);
    CHECK(rate < AtomicParams{}.gamma / 2);

    // sigma-only detection light leaves the up state untouched in the weak model
    ProbeBeam sigma_only = ProbeBeam::detection(1e-4, 0.0);
    auto gamma = lindblad::weak_probe_gamma(sigma_only, {});
    CHECK(gamma.total == 0.0);
}

TEST_CASE("steady-state scattering rate at I_sat") {
    double r = steady_state_scattering_rate(ProbeBeam::detection(1.0));
    AtomicParams params;
    CHECK(r > 0.02 * params.gamma);
    CHECK(r < 0.25 * params.gamma);
}
