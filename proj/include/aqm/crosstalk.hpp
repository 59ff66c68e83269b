#pragma once

#include <functional>
#include <vector>

#include "aqm/lindblad.hpp"

namespace aqm::crosstalk {

using lindblad::Matrix;
using lindblad::ProbeBeam;

struct ChainGeometry {
    double spacing = 6e-6;          // m
    double b_field_angle = kPi / 2;  // radians between B and the chain axis
};

struct BeamGeometry {
    double waist = 1.5e-6;  // m
    double offset = 0.0;    // m, beam center to asset ion
    double na = 0.16;
    double fov_offset = 0.0;

    void validate() const;
};

struct AqmEstimate {
    double p_aqm = 0.0;
    double fidelity = 1.0;
    double from_crosstalk = 0.0;
    double from_interion = 0.0;
};

enum class Process { Detection, Reset };

// e^(-2 d^2 / w^2)
double gaussian_crosstalk(double d, double w);

// Relative image-plane intensity at offset d for a Gaussian pupil apodization
// hard-truncated at the NA, with an optional pupil phase (arguments are pupil
// coordinates normalized to the NA disc). Doubles the quadrature grid until
// converged; throws when it cannot.
double psf_crosstalk(const BeamGeometry& geometry,
                     const std::function<double(double, double)>* aberration = nullptr,
                     double wavelength = 369.5e-9);

// Scattered-photon intensity at the asset in I_sat units:
// f_pol f_angle h nu Gamma_sc / (4 pi a^2 I_sat).
// f_pol: 1/3 (detection, pi photons) or 2/3 (reset, sigma photons);
// f_angle: sin^2(theta_B) for pi emission, (1+cos^2(theta_B))/2 for sigma.
double interion_intensity(const ChainGeometry& chain, Process process, double gamma_sc,
                          const AtomicParams& params = {});

double f_pol(Process process);
double f_angle(Process process, double b_field_angle);

struct InterIonOptions {
    // bright-ion scattering rates of the process ion at I2 = I_sat, pinned to
    // the Methods I_ab figures; overridable
    double gamma_sc_detection = 1.22e7;
    double gamma_sc_reset = 1.67e6;
    // detection exposure: unbiased process qubit, first-photon early completion
    double bright_probability = 0.5;
    bool first_photon_halving = true;
    // reset exposure: fluorescence decays with T1 = tau/7; one third of the
    // emitted photons land on the F'->F=0 line, 12.6 GHz away from every
    // transition of an asset in the up state
    double reset_spectral_overlap = 2.0 / 3;
};

// Fundamental AQM floor over an operation of duration tau.
double p_aqm_star(const ChainGeometry& chain, Process process, double tau,
                  const InterIonOptions& opts = {}, const AtomicParams& params = {});

// Combined AQM bookkeeping for one operation on the process ion: optical
// crosstalk (leaked beam at intensity ix * i2) plus the inter-ion scattering
// floor, composed as independent survival probabilities.
AqmEstimate estimate_aqm(const ChainGeometry& chain, Process process,
                         const ProbeBeam& beam_at_ion2, double ix, double tau,
                         const InterIonOptions& opts = {}, const AtomicParams& params = {});

// (2/3) e^(-tau/T2) + 1/3.
double fidelity_from_T2(double tau, double t2);

// (2/3) R_c + 1/3; contrast outside [0,1] is a domain error.
double fidelity_from_contrast(double contrast);

// tr sqrt(sqrt(rho0) rho_t sqrt(rho0)).
double uhlmann_fidelity(const Matrix& rho_before, const Matrix& rho_after);

// F(theta) for |psi> = cos(theta/2)|2> + sin(theta/2)|0> held under the weak
// probe for tau.
std::vector<double> bloch_angle_scan(const std::vector<double>& thetas, const ProbeBeam& probe,
                                     double tau, const AtomicParams& params = {});

// Weak-probe AQM rate of the asset (delegates to the collapse-table classes).
lindblad::GammaBreakdown gamma_from_intensity(const ProbeBeam& probe,
                                              const AtomicParams& params = {});

// Invert the simulated T2*(I_X) master-equation map by bisection. The probe
// template carries polarization/spectral content and the process-beam
// intensity; its intensity_sat field is interpreted as I2/I_sat so that the
// asset sees I_X * I2.
double estimate_IX_from_T2(double t2_measured, const ProbeBeam& probe_template,
                           const AtomicParams& params = {});

}  // namespace aqm::crosstalk
