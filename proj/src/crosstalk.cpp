#include "aqm/crosstalk.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "aqm/protocols.hpp"

namespace aqm::crosstalk {

void BeamGeometry::validate() const {
    if (waist <= 0) throw std::invalid_argument("beam: waist must be positive");
    if (na <= 0 || na >= 1) throw std::invalid_argument("beam: NA must be in (0,1)");
}

double gaussian_crosstalk(double d, double w) {
    if (w <= 0) throw std::domain_error("gaussian_crosstalk: waist must be positive");
    return std::exp(-2.0 * d * d / (w * w));
}

namespace {

// image-plane field of the truncated Gaussian pupil at offset x, by midpoint
// quadrature over the NA disc in normalized pupil coordinates
std::complex<double> pupil_field_at(double x, double waist, double na, double wavelength,
                                    const std::function<double(double, double)>* aberration,
                                    int n) {
    const double u_na = na / wavelength;            // pupil cutoff spatial frequency
    const double gauss_scale = kPi * waist * u_na;  // exponent at the aperture edge
    std::complex<double> acc = 0.0;
    const double du = 2.0 / n;
    for (int iy = 0; iy < n; ++iy) {
        double vy = -1.0 + (iy + 0.5) * du;
        for (int ix = 0; ix < n; ++ix) {
            double vx = -1.0 + (ix + 0.5) * du;
            double r2 = vx * vx + vy * vy;
            if (r2 > 1.0) continue;
            double amp = std::exp(-gauss_scale * gauss_scale * r2);
            double phase = -kTwoPi * (u_na * vx) * x;
            if (aberration) phase += (*aberration)(vx, vy);
            acc += amp * std::exp(std::complex<double>(0, phase));
        }
    }
    return acc * du * du;
}

}  // namespace

double psf_crosstalk(const BeamGeometry& geometry,
                     const std::function<double(double, double)>* aberration, double wavelength) {
    geometry.validate();
    const double d = geometry.offset;
    double prev = -1.0;
    for (int n = 128; n <= 2048; n *= 2) {
        std::complex<double> e0 = pupil_field_at(0.0, geometry.waist, geometry.na, wavelength,
                                                 aberration, n);
        std::complex<double> ed = pupil_field_at(d, geometry.waist, geometry.na, wavelength,
                                                 aberration, n);
        double value = std::norm(ed) / std::norm(e0);
        if (prev >= 0) {
            double tol = 1e-7 + 1e-3 * value;
            if (std::abs(value - prev) < tol) return value;
        }
        prev = value;
    }
    throw std::runtime_error("psf_crosstalk: quadrature did not converge");
}

double f_pol(Process process) { return process == Process::Detection ? 1.0 / 3 : 2.0 / 3; }

double f_angle(Process process, double b_field_angle) {
    double c = std::cos(b_field_angle);
    double s = std::sin(b_field_angle);
    if (process == Process::Detection) return s * s;       // pi-dipole pattern toward the chain
    return 0.5 * (1.0 + c * c);                            // sigma pattern
}

double interion_intensity(const ChainGeometry& chain, Process process, double gamma_sc,
                          const AtomicParams& params) {
    if (chain.spacing <= 0) throw std::invalid_argument("chain: spacing must be positive");
    double flux = f_pol(process) * f_angle(process, chain.b_field_angle) * params.photon_energy() *
                  gamma_sc / (4.0 * kPi * chain.spacing * chain.spacing);
    return flux / params.saturation_intensity();
}

double p_aqm_star(const ChainGeometry& chain, Process process, double tau,
                  const InterIonOptions& opts, const AtomicParams& params) {
    if (tau < 0) throw std::invalid_argument("p_aqm_star: negative duration");
    if (tau == 0) return 0.0;
    double gamma_sc =
        process == Process::Detection ? opts.gamma_sc_detection : opts.gamma_sc_reset;
    double i_ab = interion_intensity(chain, process, gamma_sc, params);
    double gamma = params.gamma / 6.0 * i_ab;

    double tau_eff;
    if (process == Process::Detection) {
        tau_eff = tau * opts.bright_probability * (opts.first_photon_halving ? 0.5 : 1.0);
    } else {
        double t1 = tau / 7.0;
        tau_eff = t1 * (1.0 - std::exp(-tau / t1)) * opts.reset_spectral_overlap;
    }
    return 1.0 - std::exp(-gamma * tau_eff / 3.0);
}

AqmEstimate estimate_aqm(const ChainGeometry& chain, Process process,
                         const ProbeBeam& beam_at_ion2, double ix, double tau,
                         const InterIonOptions& opts, const AtomicParams& params) {
    if (ix < 0 || tau < 0) throw std::invalid_argument("estimate_aqm: negative input");
    ProbeBeam leaked = beam_at_ion2;
    leaked.intensity_sat = ix * beam_at_ion2.intensity_sat;
    double gamma = lindblad::weak_probe_gamma(leaked, params).total;
    AqmEstimate out;
    out.from_crosstalk = 1.0 - std::exp(-gamma * tau / 3.0);
    out.from_interion = p_aqm_star(chain, process, tau, opts, params);
    out.p_aqm = 1.0 - (1.0 - out.from_crosstalk) * (1.0 - out.from_interion);
    out.fidelity = 1.0 - out.p_aqm;
    return out;
}

double fidelity_from_T2(double tau, double t2) {
    if (t2 <= 0) throw std::domain_error("fidelity_from_T2: T2 must be positive");
    if (tau < 0) throw std::domain_error("fidelity_from_T2: negative duration");
    return 2.0 / 3 * std::exp(-tau / t2) + 1.0 / 3;
}

double fidelity_from_contrast(double contrast) {
    if (contrast < -1e-12 || contrast > 1 + 1e-12)
        throw std::domain_error("fidelity_from_contrast: contrast outside [0,1]");
    return 2.0 / 3 * std::clamp(contrast, 0.0, 1.0) + 1.0 / 3;
}

double uhlmann_fidelity(const Matrix& rho_before, const Matrix& rho_after) {
    if (rho_before.rows() != rho_after.rows() || rho_before.cols() != rho_after.cols())
        throw std::domain_error("uhlmann_fidelity: dimension mismatch");
    try {
        lindblad::check_valid_state(rho_before, 1e-8, 1e-7, 1e-7);
        lindblad::check_valid_state(rho_after, 1e-8, 1e-7, 1e-7);
    } catch (const std::invalid_argument& e) {
        throw std::domain_error(e.what());
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es((rho_before + rho_before.adjoint()) / 2.0);
    Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Matrix sqrt_rho = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();

    Matrix inner = sqrt_rho * rho_after * sqrt_rho;
    Eigen::SelfAdjointEigenSolver<Matrix> es2((inner + inner.adjoint()) / 2.0);
    double f = 0;
    for (int i = 0; i < es2.eigenvalues().size(); ++i)
        f += std::sqrt(std::max(0.0, es2.eigenvalues()(i)));
    return std::min(f, 1.0);
}

std::vector<double> bloch_angle_scan(const std::vector<double>& thetas, const ProbeBeam& probe,
                                     double tau, const AtomicParams& params) {
    auto ops = lindblad::weak_probe_ops_for(probe, params);
    Matrix h = Matrix::Zero(4, 4);  // fidelity of a held state; diagonal frame terms cancel
    std::vector<double> out;
    out.reserve(thetas.size());
    for (double theta : thetas) {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
        psi(2) = std::cos(theta / 2);
        psi(0) = std::sin(theta / 2);
        Matrix rho0 = psi * psi.adjoint();
        Matrix rho = lindblad::evolve(rho0, h, ops, tau);
        out.push_back(uhlmann_fidelity(rho0, rho));
    }
    return out;
}

lindblad::GammaBreakdown gamma_from_intensity(const ProbeBeam& probe, const AtomicParams& params) {
    return lindblad::weak_probe_gamma(probe, params);
}

namespace {

double simulated_t2(double ix, const ProbeBeam& probe_template, const AtomicParams& params) {
    ProbeBeam at_asset = probe_template;
    at_asset.intensity_sat = ix * probe_template.intensity_sat;
    // coarse estimate places the fit window; the weak-probe rate is the guide
    double gamma = lindblad::weak_probe_gamma(at_asset, params).total;
    if (gamma <= 0) return std::numeric_limits<double>::infinity();
    protocols::RamseyConfig cfg;
    cfg.probe = at_asset;
    double t2_guess = 2.0 / gamma;
    // 15-point grid across the contrast decay keeps the bisection affordable
    cfg.wait_grid.clear();
    for (int i = 1; i <= 15; ++i) cfg.wait_grid.push_back(2.0 * t2_guess * i / 15);
    auto result = protocols::simulate_ramsey(cfg);
    return result.t2_star;
}

}  // namespace

double estimate_IX_from_T2(double t2_measured, const ProbeBeam& probe_template,
                           const AtomicParams& params) {
    if (t2_measured <= 0) throw std::invalid_argument("estimate_IX_from_T2: T2 must be positive");
    const double ix_min = 1e-8, ix_max = 1e-2;  // supported inversion range

    // analytic rate map brackets the simulated (monotone) curve; refusing
    // out-of-range inputs here avoids simulating second-long evolutions
    double gamma_unit = lindblad::weak_probe_gamma(probe_template, params).total;
    if (gamma_unit <= 0)
        throw std::invalid_argument("estimate_IX_from_T2: probe template has no AQM channel");
    double ix_guess = 2.0 / (t2_measured * gamma_unit);
    if (ix_guess < ix_min / 2 || ix_guess > ix_max * 2)
        throw std::runtime_error("estimate_IX_from_T2: T2 outside the simulated range");

    double lo = std::max(ix_guess / 4, ix_min), hi = std::min(ix_guess * 4, ix_max);
    if (simulated_t2(lo, probe_template, params) < t2_measured ||
        simulated_t2(hi, probe_template, params) > t2_measured)
        throw std::runtime_error("estimate_IX_from_T2: T2 outside the simulated range");
    for (int it = 0; it < 30; ++it) {
        double mid = std::sqrt(lo * hi);
        double t2 = simulated_t2(mid, probe_template, params);
        if (t2 > t2_measured)
            lo = mid;  // too little crosstalk; decay too slow
        else
            hi = mid;
        if (hi / lo < 1.0005) break;
    }
    return std::sqrt(lo * hi);
}

}  // namespace aqm::crosstalk
