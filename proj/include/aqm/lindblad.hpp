#pragma once

#include <Eigen/Dense>
#include <vector>

#include "aqm/atomic.hpp"
#include "aqm/constants.hpp"

namespace aqm::lindblad {

using Matrix = Eigen::MatrixXcd;

// Optical probe at one ion, intensities in I_sat units. Spectral content is
// split between the D1(11) pumping branch and the D1(10) detection branch;
// d1_11_fraction = I^(11)/I. Polarization fractions must sum to 1.
struct ProbeBeam {
    double intensity_sat = 0.0;
    double pi_fraction = 1.0 / 3;
    double sigma_plus_fraction = 1.0 / 3;
    double sigma_minus_fraction = 1.0 / 3;
    double d1_11_fraction = 0.0;
    double detuning = 0.0;  // rad/s from each active branch's m=0 line

    void validate() const;  // throws std::invalid_argument

    double component(atomic::Branch b, atomic::Polarization p) const;

    static ProbeBeam detection(double intensity, double pi_frac = 1.0 / 3);
    static ProbeBeam reset(double intensity, double pi_frac = 0.86, double d11_frac = 1.0);
};

struct MicrowaveDrive {
    double rabi = 0.0;
    double detuning = kTwoPi * 10e3;  // rad/s
    double phase = 0.0;
};

// sqrt(rate) |to><from|; from == to is a projector (pure dephasing).
struct CollapseOperator {
    double rate;
    int from;
    int to;
};

// ---- state helpers ----------------------------------------------------

Matrix pure_state(int dim, int index);
double hermiticity_error(const Matrix& rho);
double trace_error(const Matrix& rho);
double min_eigenvalue(const Matrix& rho);
void check_valid_state(const Matrix& rho, double herm_tol = 1e-10, double trace_tol = 1e-9,
                       double positivity_tol = 1e-9);

// ---- Hamiltonian assembly ----------------------------------------------

struct HamiltonianOptions {
    bool include_off_resonant = true;  // far-detuned cross-manifold channels
    bool reduced = false;              // 4-level S-manifold model
    // Treat the cross-manifold channels as coherent detuned couplings instead
    // of eliminated scattering rates. Only a single spectral branch admits a
    // rotating frame in this mode; two branches throw.
    bool coherent_cross_coupling = false;
};

// Rotating-frame Hamiltonian plus the incoherent channels implied by the
// drive configuration (spontaneous emission and, when enabled, adiabatically
// eliminated off-resonant scattering). Bichromatic drive of a single level
// pair has no rotating frame and throws std::runtime_error.
struct Engine {
    Matrix hamiltonian;
    std::vector<CollapseOperator> collapse_ops;
    int dim;
};

Matrix build_hamiltonian(const atomic::LevelScheme& scheme, const ProbeBeam* probe,
                         const MicrowaveDrive* mw, const AtomicParams& params,
                         const HamiltonianOptions& opts = {});

std::vector<CollapseOperator> spontaneous_collapse_ops(const atomic::LevelScheme& scheme,
                                                       const AtomicParams& params);

// Raman channels from far-detuned excitation, rate Omega^2 Gamma/(4D^2+G^2+2O^2)
// times the decay branching of the virtual upper level.
std::vector<CollapseOperator> offresonant_scattering_ops(const atomic::LevelScheme& scheme,
                                                         const ProbeBeam& probe,
                                                         const AtomicParams& params);

Engine make_engine(const atomic::LevelScheme& scheme, const ProbeBeam* probe,
                   const MicrowaveDrive* mw, const AtomicParams& params,
                   const HamiltonianOptions& opts = {});

// ---- weak-probe model ----------------------------------------------------

enum class WeakProbeClass { D10_Pi, D11_SigmaPlus, D11_SigmaMinus };

// The three-operator sets acting on |2>: e.g. D10_Pi gives
// sqrt(g/3){|2><2|, |1><2|, |3><2|}.
std::vector<CollapseOperator> weak_probe_collapse_ops(WeakProbeClass cls, double gamma);

// AQM rate of a |2>-populated asset under a weak probe: (Gamma/6) per unit
// I/I_sat of each AQM-active component (pi of D1(10), sigma of D1(11)).
struct GammaBreakdown {
    double total = 0.0;
    double d10_pi = 0.0;
    double d11_sigma_plus = 0.0;
    double d11_sigma_minus = 0.0;
    bool weak_regime = true;  // false when I > 0.1 I_sat
};
GammaBreakdown weak_probe_gamma(const ProbeBeam& probe, const AtomicParams& params);

// Collapse set of the full table for a probe (all active classes combined).
std::vector<CollapseOperator> weak_probe_ops_for(const ProbeBeam& probe,
                                                 const AtomicParams& params);

// 4-level rotating-frame diagonal: 0, -(D_uw+D_zm), -D_uw, -(D_uw-D_zm).
Matrix h_atom_reduced(double detuning_uw, double zeeman);

// ---- time evolution -------------------------------------------------------

struct IntegratorOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_step = 0.0;  // 0: unlimited
};

struct IntegratorError : std::runtime_error {
    double achieved_tolerance;
    IntegratorError(const std::string& msg, double achieved)
        : std::runtime_error(msg), achieved_tolerance(achieved) {}
};

// Lindblad right-hand side d(rho)/dt.
Matrix lindblad_rhs(const Matrix& h, const std::vector<CollapseOperator>& ops, const Matrix& rho);

// Adaptive Dormand-Prince 4/5 on the master equation. Checks trace and
// Hermiticity of the result; throws IntegratorError when the step control
// cannot reach tolerance.
Matrix evolve(const Matrix& rho0, const Matrix& h, const std::vector<CollapseOperator>& ops,
              double t, const IntegratorOptions& opts = {});

// Evolve and sample at the given times (non-decreasing, first >= 0).
std::vector<Matrix> evolve_sampled(const Matrix& rho0, const Matrix& h,
                                   const std::vector<CollapseOperator>& ops,
                                   const std::vector<double>& times,
                                   const IntegratorOptions& opts = {});

// Fixed-step RK4 reference used by the integrator tests.
Matrix evolve_fixed_step(const Matrix& rho0, const Matrix& h,
                         const std::vector<CollapseOperator>& ops, double t, double dt);

// Closed-form Ramsey readout: 1/4 + 1/2 e^(-g t/2) cos(D t) + 1/4 e^(-2g t/3).
double analytic_ramsey_rho22(double gamma, double detuning_uw, double t);

// Ideal pi/2 rotation on the {|0>,|2>} pair, drive phase phi.
Matrix half_pi_pulse(int dim, double phase = 0.0);

}  // namespace aqm::lindblad
