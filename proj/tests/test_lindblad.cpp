#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "aqm/lindblad.hpp"
#include "aqm/rng.hpp"

using namespace aqm;
using namespace aqm::lindblad;

namespace {

// dense first-order Euler reference, step 1e-4/Gamma-scale
Matrix euler_oracle(const Matrix& rho0, const Matrix& h, const std::vector<CollapseOperator>& ops,
                    double t, double dt) {
    Matrix y = rho0;
    long n = std::lround(std::ceil(t / dt));
    double step = t / double(n);
    for (long i = 0; i < n; ++i) y += step * lindblad_rhs(h, ops, y);
    return y;
}

}  // namespace

TEST_CASE("probe validation") {
    ProbeBeam p = ProbeBeam::detection(0.5);
    CHECK_NOTHROW(p.validate());
    p.pi_fraction = 0.9;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    ProbeBeam q = ProbeBeam::reset(1.25);
    CHECK(q.component(atomic::Branch::D1_11, atomic::Polarization::Pi) ==
          doctest::Approx(1.25 * 0.86));
    CHECK(q.component(atomic::Branch::D1_10, atomic::Polarization::Pi) == 0.0);
}

TEST_CASE("h_atom diagonal matches the microwave rotating frame") {
    atomic::LevelScheme scheme;
    AtomicParams params;
    MicrowaveDrive mw;  // default 2pi x 10 kHz detuning, no coupling term
    Matrix h = build_hamiltonian(scheme, nullptr, &mw, params);
    double duw = mw.detuning, dzm = scheme.zeeman_s;
    CHECK(h(0, 0).real() == doctest::Approx(0.0));
    CHECK(h(1, 1).real() == doctest::Approx(-(duw + dzm)));
    CHECK(h(2, 2).real() == doctest::Approx(-duw));
    CHECK(h(3, 3).real() == doctest::Approx(-(duw - dzm)));
    // off-diagonals vanish without drives
    CHECK((h - h.diagonal().asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() == 0.0);

    Matrix h4 = build_hamiltonian(scheme, nullptr, &mw, params, {.reduced = true});
    CHECK(h4.rows() == 4);
    CHECK(h4(1, 1).real() == doctest::Approx(-(duw + dzm)));
}

TEST_CASE("all drives absent gives zero operator") {
    atomic::LevelScheme scheme;
    AtomicParams params;
    Matrix h = build_hamiltonian(scheme, nullptr, nullptr, params);
    CHECK(h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pure-pi D1(11) light does not couple out of the up state") {
    atomic::LevelScheme scheme;
    AtomicParams params;
    ProbeBeam p = ProbeBeam::reset(1.0, /*pi_frac=*/1.0, /*d11_frac=*/1.0);
    Matrix h = build_hamiltonian(scheme, &p, nullptr, params);
    for (int e = 4; e < 8; ++e) CHECK(std::abs(h(scheme.kUp, e)) == 0.0);
    // but m = +-1 states are driven
    CHECK(std::abs(h(1, scheme.index_of(true, 1, -1))) > 0.0);
}

TEST_CASE("bichromatic coherent cross coupling has no rotating frame") {
    atomic::LevelScheme scheme;
    AtomicParams params;
    ProbeBeam p = ProbeBeam::reset(1.0, 0.86, 0.7);  // both spectral branches present
    HamiltonianOptions opts;
    opts.coherent_cross_coupling = true;
    CHECK_THROWS_AS(build_hamiltonian(scheme, &p, nullptr, params, opts), std::runtime_error);
    // eliminated-rate mode accepts the same beam
    CHECK_NOTHROW(build_hamiltonian(scheme, &p, nullptr, params, {}));
}

TEST_CASE("spontaneous collapse operators") {
    atomic::LevelScheme scheme;
    AtomicParams params;
    auto ops = spontaneous_collapse_ops(scheme, params);
    CHECK(ops.size() == 12);
    for (int e = 4; e < 8; ++e) {
        double out = 0;
        for (const auto& op : ops)
            if (op.from == e) out += op.rate;
        CHECK(out == doctest::Approx(params.gamma).epsilon(1e-12));
    }
    for (const auto& op : ops) CHECK(op.rate >= 0.0);
}

TEST_CASE("weak probe collapse table") {
    double g = 123.0;
    auto pi_ops = weak_probe_collapse_ops(WeakProbeClass::D10_Pi, g);
    REQUIRE(pi_ops.size() == 3);
    for (const auto& op : pi_ops) {
        CHECK(op.rate == doctest::Approx(g / 3));
        CHECK(op.from == 2);
    }
    CHECK(pi_ops[0].to == 2);
    CHECK(pi_ops[1].to == 1);
    CHECK(pi_ops[2].to == 3);

    auto sp = weak_probe_collapse_ops(WeakProbeClass::D11_SigmaPlus, g);
    CHECK(sp[0].to == 2);
    CHECK(sp[1].to == 3);
    CHECK(sp[2].to == 0);

    auto sm = weak_probe_collapse_ops(WeakProbeClass::D11_SigmaMinus, g);
    CHECK(sm[0].to == 2);
    CHECK(sm[1].to == 1);
    CHECK(sm[2].to == 0);

    for (const auto& op : weak_probe_collapse_ops(WeakProbeClass::D10_Pi, 0.0))
        CHECK(op.rate == 0.0);
}

TEST_CASE("evolve: identity without dynamics") {
    Matrix rho = pure_state(4, 2);
    Matrix h = Matrix::Zero(4, 4);
    Matrix out = evolve(rho, h, {}, 1.0e-3);
    CHECK((out - rho).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("evolve: detection-pi table reproduces rho22 = exp(-2 g t/3)") {
    double g = 2.0e4;
    auto ops = weak_probe_collapse_ops(WeakProbeClass::D10_Pi, g);
    Matrix rho = pure_state(4, 2);
    Matrix h = h_atom_reduced(kTwoPi * 10e3, kTwoPi * 3.25e6);
    for (double t : {1e-5, 1e-4, 5e-5 * 3}) {
        Matrix out = evolve(rho, h, ops, t);
        CHECK(out(2, 2).real() == doctest::Approx(std::exp(-2.0 * g * t / 3)).epsilon(1e-8));
        CHECK(std::sqrt(out(2, 2).real()) ==
              doctest::Approx(std::exp(-g * t / 3)).epsilon(1e-8));
    }
}

TEST_CASE("evolve: resonant Rabi flopping") {
    double omega = kTwoPi * 50e3;
    Matrix h = Matrix::Zero(4, 4);
    h(0, 2) = omega / 2;
    h(2, 0) = omega / 2;
    Matrix rho = pure_state(4, 0);
    for (double t : {1e-6, 5e-6, 12e-6}) {
        Matrix out = evolve(rho, h, {}, t);
        double expected = std::sin(omega * t / 2) * std::sin(omega * t / 2);
        CHECK(out(2, 2).real() == doctest::Approx(expected).epsilon(1e-7));
    }
}

TEST_CASE("evolve: state hygiene and semigroup property") {
    atomic::LevelScheme scheme;
    AtomicParams params;
    ProbeBeam p = ProbeBeam::reset(1.25);
    Engine eng = make_engine(scheme, &p, nullptr, params);
    Matrix rho = pure_state(8, 2);

    Matrix a = evolve(rho, eng.hamiltonian, eng.collapse_ops, 2e-6);
    CHECK(hermiticity_error(a) < 1e-10);
    CHECK(trace_error(a) < 1e-9);
    CHECK(min_eigenvalue(a) > -1e-9);

    Matrix b1 = evolve(a, eng.hamiltonian, eng.collapse_ops, 1e-6);
    Matrix b2 = evolve(rho, eng.hamiltonian, eng.collapse_ops, 3e-6);
    CHECK((b1 - b2).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("adaptive integrator against dense Euler oracle on random small instances") {
    Rng rng(42);
    AtomicParams params;
    for (int trial = 0; trial < 5; ++trial) {
        Matrix h = Matrix::Zero(4, 4);
        for (int i = 0; i < 4; ++i) h(i, i) = (rng.uniform() - 0.5) * 0.2 * params.gamma;
        h(0, 2) = 0.1 * params.gamma * rng.uniform();
        h(2, 0) = std::conj(h(0, 2));
        std::vector<CollapseOperator> ops = {
            {0.05 * params.gamma * rng.uniform(), 2, 1},
            {0.05 * params.gamma * rng.uniform(), 2, 2},
        };
        Matrix rho = Matrix::Zero(4, 4);
        rho(0, 0) = 0.3;
        rho(2, 2) = 0.7;
        rho(0, 2) = 0.2;
        rho(2, 0) = 0.2;

        double t = 2.0 / params.gamma;  // short instance keeps the Euler error first-order small
        Matrix ref = euler_oracle(rho, h, ops, t, 1e-4 / params.gamma);
        Matrix adap = evolve(rho, h, ops, t);
        CHECK((ref - adap).cwiseAbs().maxCoeff() < 1e-5);
    }
}

TEST_CASE("fixed-step RK4 reference agrees with adaptive integrator") {
    Matrix h = h_atom_reduced(kTwoPi * 10e3, kTwoPi * 3.25e6);
    auto ops = weak_probe_collapse_ops(WeakProbeClass::D11_SigmaPlus, 3.0e4);
    Matrix rho = pure_state(4, 2);
    double t = 4e-5;
    Matrix a = evolve_fixed_step(rho, h, ops, t, 1e-9);
    Matrix b = evolve(rho, h, ops, t);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("integrator failure reports the achieved tolerance") {
    Matrix h = Matrix::Zero(4, 4);
    h(0, 0) = std::numeric_limits<double>::quiet_NaN();
    Matrix rho = pure_state(4, 0);
    try {
        evolve(rho, h, {}, 1e-6);
        FAIL("expected IntegratorError");
    } catch (const IntegratorError& e) {
        CHECK(std::string(e.what()).find("step size underflow") != std::string::npos);
        CHECK_FALSE(e.achieved_tolerance <= 1.0);  // NaN or > 1: tolerance not reached
    }
}

TEST_CASE("analytic ramsey rho22") {
    CHECK(analytic_ramsey_rho22(0.0, kTwoPi * 10e3, 4 * 2e-4 * 0.5) ==
          doctest::Approx(1.0).epsilon(1e-12));  // D t = 2 pi m
    double d = kTwoPi * 10e3;
    CHECK(analytic_ramsey_rho22(0.0, d, kPi / d) == doctest::Approx(0.0).epsilon(1e-12));
    // contrast over one fringe ~ e^{-g t/2}
    double g = 100.0, t = 3e-3;
    double hi = analytic_ramsey_rho22(g, d, t);
    double lo = analytic_ramsey_rho22(g, d, t + kPi / d);
    CHECK(hi - lo == doctest::Approx(std::exp(-g * t / 2)).epsilon(1e-2));
}

TEST_CASE("numeric ramsey sequence matches the analytic chain") {
    // pi/2 - wait - pi/2 with the detection-pi collapse table
    double g = 600.0;
    double duw = kTwoPi * 10e3;
    Matrix h = h_atom_reduced(duw, kTwoPi * 3.25e6);
    auto ops = weak_probe_collapse_ops(WeakProbeClass::D10_Pi, g);
    Matrix u = half_pi_pulse(4);

    for (double t : {1e-4, 8e-4, 3.0 / g}) {
        Matrix rho = pure_state(4, 0);
        rho = (u * rho * u.adjoint()).eval();
        rho = evolve(rho, h, ops, t, {.rtol = 1e-11, .atol = 1e-14});
        double contrast = 2.0 * std::abs(rho(0, 2));
        rho = (u * rho * u.adjoint()).eval();
        double p2 = rho(2, 2).real();
        CHECK(p2 == doctest::Approx(analytic_ramsey_rho22(g, duw, t)).epsilon(1e-6));
        CHECK(contrast == doctest::Approx(std::exp(-g * t / 2)).epsilon(1e-6));
    }
}

TEST_CASE("off-resonant scattering ops are weak and only present with the flag") {
    atomic::LevelScheme scheme;
    AtomicParams params;
    ProbeBeam det = ProbeBeam::detection(1.0);
    auto ops = offresonant_scattering_ops(scheme, det, params);
    CHECK(!ops.empty());
    double total = 0;
    for (const auto& op : ops) {
        CHECK(op.rate >= 0);
        total += op.rate;
    }
    // far-detuned: orders of magnitude below Gamma
    CHECK(total < 1e-5 * params.gamma);
    CHECK(total > 0);

    Engine with = make_engine(scheme, &det, nullptr, params);
    Engine without = make_engine(scheme, &det, nullptr, params, {.include_off_resonant = false});
    CHECK(with.collapse_ops.size() > without.collapse_ops.size());
}
