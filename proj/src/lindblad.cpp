#include "aqm/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aqm::lindblad {

using atomic::Branch;
using atomic::Polarization;

void ProbeBeam::validate() const {
    if (intensity_sat < 0) throw std::invalid_argument("probe: negative intensity");
    for (double f : {pi_fraction, sigma_plus_fraction, sigma_minus_fraction, d1_11_fraction})
        if (f < -1e-12 || f > 1 + 1e-12)
            throw std::invalid_argument("probe: fraction outside [0,1]");
    double pol = pi_fraction + sigma_plus_fraction + sigma_minus_fraction;
    if (std::abs(pol - 1.0) > 1e-12)
        throw std::invalid_argument("probe: polarization fractions must sum to 1");
}

double ProbeBeam::component(Branch b, Polarization p) const {
    double spectral = 0.0;
    if (b == Branch::D1_11) spectral = d1_11_fraction;
    else if (b == Branch::D1_10) spectral = 1.0 - d1_11_fraction;
    double pol = p == Polarization::Pi
                     ? pi_fraction
                     : (p == Polarization::SigmaPlus ? sigma_plus_fraction : sigma_minus_fraction);
    return intensity_sat * spectral * pol;
}

ProbeBeam ProbeBeam::detection(double intensity, double pi_frac) {
    ProbeBeam p;
    p.intensity_sat = intensity;
    p.pi_fraction = pi_frac;
    p.sigma_plus_fraction = (1.0 - pi_frac) / 2;
    p.sigma_minus_fraction = (1.0 - pi_frac) / 2;
    p.d1_11_fraction = 0.0;
    return p;
}

ProbeBeam ProbeBeam::reset(double intensity, double pi_frac, double d11_frac) {
    ProbeBeam p;
    p.intensity_sat = intensity;
    p.pi_fraction = pi_frac;
    p.sigma_plus_fraction = (1.0 - pi_frac) / 2;
    p.sigma_minus_fraction = (1.0 - pi_frac) / 2;
    p.d1_11_fraction = d11_frac;
    return p;
}

// ---- state helpers ----------------------------------------------------

Matrix pure_state(int dim, int index) {
    Matrix rho = Matrix::Zero(dim, dim);
    rho(index, index) = 1.0;
    return rho;
}

double hermiticity_error(const Matrix& rho) {
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double trace_error(const Matrix& rho) { return std::abs(rho.trace().real() - 1.0) +
                                               std::abs(rho.trace().imag()); }

double min_eigenvalue(const Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es((rho + rho.adjoint()) / 2.0);
    return es.eigenvalues().minCoeff();
}

void check_valid_state(const Matrix& rho, double herm_tol, double trace_tol,
                       double positivity_tol) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("state: not square");
    if (!rho.allFinite()) throw std::invalid_argument("state: non-finite entries");
    if (hermiticity_error(rho) > herm_tol) throw std::invalid_argument("state: not Hermitian");
    if (trace_error(rho) > trace_tol) throw std::invalid_argument("state: trace != 1");
    if (min_eigenvalue(rho) < -positivity_tol) throw std::invalid_argument("state: not positive");
}

// ---- Hamiltonian assembly ----------------------------------------------

namespace {

struct PairDrive {
    int lower, upper;
    bool assigned = false;
    Branch branch{};
};

}  // namespace

Matrix build_hamiltonian(const atomic::LevelScheme& scheme, const ProbeBeam* probe,
                         const MicrowaveDrive* mw, const AtomicParams& params,
                         const HamiltonianOptions& opts) {
    const double d_uw = mw ? mw->detuning : 0.0;

    if (opts.reduced) {
        Matrix h = h_atom_reduced(d_uw, scheme.zeeman_s);
        if (mw && mw->rabi != 0.0) {
            std::complex<double> c =
                0.5 * mw->rabi * std::exp(std::complex<double>(0, mw->phase));
            h(0, 2) += c;
            h(2, 0) += std::conj(c);
        }
        return h;
    }

    Matrix h = Matrix::Zero(8, 8);
    if (!mw && (!probe || probe->intensity_sat == 0.0)) return h;  // bare interaction picture
    const auto& levels = scheme.levels();

    // S diagonal: F=1 manifold rotates at the microwave frequency, |0> at 0.
    for (int i = 0; i < 4; ++i) {
        if (levels[i].f == 1) h(i, i) = levels[i].mf * scheme.zeeman_s - d_uw;
    }

    if (mw && mw->rabi != 0.0) {
        std::complex<double> c = 0.5 * mw->rabi * std::exp(std::complex<double>(0, mw->phase));
        h(0, 2) += c;
        h(2, 0) += std::conj(c);
    }

    const double probe_detuning = probe ? probe->detuning : 0.0;

    // P diagonal relative to each manifold's resonant branch frame.
    for (int e = 4; e < 8; ++e)
        h(e, e) = levels[e].mf * scheme.zeeman_p - d_uw - probe_detuning;

    if (!probe || probe->intensity_sat == 0.0) return h;
    probe->validate();

    const bool has_11 = probe->d1_11_fraction > 0.0;
    const bool has_10 = probe->d1_11_fraction < 1.0;

    if (opts.include_off_resonant && opts.coherent_cross_coupling && has_11 && has_10)
        throw std::runtime_error(
            "no rotating frame exists: both spectral branches would drive the same "
            "S(F=1)<->P level pairs at incommensurate frequencies");

    for (const auto& t : atomic::transitions(scheme)) {
        if (!t.allowed || t.branch == Branch::D1_01) continue;
        double intensity = probe->component(t.branch, t.polarization);
        double cross_detuning = 0.0;
        if (intensity == 0.0 && opts.include_off_resonant && opts.coherent_cross_coupling) {
            // single-branch config: the present branch drives the other manifold
            Branch other = t.branch == Branch::D1_11 ? Branch::D1_10 : Branch::D1_11;
            intensity = probe->component(other, t.polarization);
            cross_detuning = t.branch == Branch::D1_11 ? -scheme.hyperfine_p : scheme.hyperfine_p;
        }
        if (intensity == 0.0) continue;
        double coupling = 0.5 * params.gamma * std::sqrt(intensity / 2.0) * t.amplitude;
        h(t.lower, t.upper) += coupling;
        h(t.upper, t.lower) += coupling;
        if (cross_detuning != 0.0) h(t.upper, t.upper) += cross_detuning;
    }
    return h;
}

std::vector<CollapseOperator> spontaneous_collapse_ops(const atomic::LevelScheme& scheme,
                                                       const AtomicParams& params) {
    std::vector<CollapseOperator> ops;
    for (int e = 4; e < 8; ++e)
        for (const auto& ch : atomic::decay_branching(e, scheme, params))
            ops.push_back({ch.rate, e, ch.lower});
    return ops;
}

std::vector<CollapseOperator> offresonant_scattering_ops(const atomic::LevelScheme& scheme,
                                                         const ProbeBeam& probe,
                                                         const AtomicParams& params) {
    std::vector<CollapseOperator> ops;
    const double g = params.gamma;
    for (const auto& t : atomic::transitions(scheme)) {
        if (!t.allowed || t.branch == Branch::D1_01) continue;
        // light of the OTHER branch drives this pair, detuned by the P splitting
        Branch other = t.branch == Branch::D1_11 ? Branch::D1_10 : Branch::D1_11;
        double intensity = probe.component(other, t.polarization);
        if (intensity == 0.0) continue;
        double detuning = t.branch == Branch::D1_11 ? -scheme.hyperfine_p : scheme.hyperfine_p;
        detuning += probe.detuning;
        double omega_sq = intensity * g * g * t.amplitude * t.amplitude / 2.0;
        double rate = omega_sq * g / (4.0 * detuning * detuning + g * g + 2.0 * omega_sq);
        for (const auto& ch : atomic::decay_branching(t.upper, scheme, params))
            ops.push_back({rate * ch.rate / g, t.lower, ch.lower});
    }
    return ops;
}

Engine make_engine(const atomic::LevelScheme& scheme, const ProbeBeam* probe,
                   const MicrowaveDrive* mw, const AtomicParams& params,
                   const HamiltonianOptions& opts) {
    Engine e;
    e.hamiltonian = build_hamiltonian(scheme, probe, mw, params, opts);
    e.dim = opts.reduced ? 4 : 8;
    if (!opts.reduced) {
        e.collapse_ops = spontaneous_collapse_ops(scheme, params);
        if (probe && opts.include_off_resonant && !opts.coherent_cross_coupling) {
            auto extra = offresonant_scattering_ops(scheme, *probe, params);
            e.collapse_ops.insert(e.collapse_ops.end(), extra.begin(), extra.end());
        }
    }
    return e;
}

// ---- weak-probe model ----------------------------------------------------

std::vector<CollapseOperator> weak_probe_collapse_ops(WeakProbeClass cls, double gamma) {
    if (gamma < 0) throw std::domain_error("weak_probe_collapse_ops: negative rate");
    const double r = gamma / 3.0;
    switch (cls) {
        case WeakProbeClass::D10_Pi:
            return {{r, 2, 2}, {r, 2, 1}, {r, 2, 3}};
        case WeakProbeClass::D11_SigmaPlus:
            return {{r, 2, 2}, {r, 2, 3}, {r, 2, 0}};
        case WeakProbeClass::D11_SigmaMinus:
            return {{r, 2, 2}, {r, 2, 1}, {r, 2, 0}};
    }
    throw std::domain_error("weak_probe_collapse_ops: unknown class");
}

GammaBreakdown weak_probe_gamma(const ProbeBeam& probe, const AtomicParams& params) {
    probe.validate();
    GammaBreakdown out;
    const double unit = params.gamma / 6.0;
    out.d10_pi = unit * probe.component(Branch::D1_10, Polarization::Pi);
    out.d11_sigma_plus = unit * probe.component(Branch::D1_11, Polarization::SigmaPlus);
    out.d11_sigma_minus = unit * probe.component(Branch::D1_11, Polarization::SigmaMinus);
    out.total = out.d10_pi + out.d11_sigma_plus + out.d11_sigma_minus;
    out.weak_regime = probe.intensity_sat <= 0.1;
    return out;
}

std::vector<CollapseOperator> weak_probe_ops_for(const ProbeBeam& probe,
                                                 const AtomicParams& params) {
    auto g = weak_probe_gamma(probe, params);
    std::vector<CollapseOperator> ops;
    auto add = [&](WeakProbeClass cls, double gamma) {
        if (gamma <= 0) return;
        auto part = weak_probe_collapse_ops(cls, gamma);
        ops.insert(ops.end(), part.begin(), part.end());
    };
    add(WeakProbeClass::D10_Pi, g.d10_pi);
    add(WeakProbeClass::D11_SigmaPlus, g.d11_sigma_plus);
    add(WeakProbeClass::D11_SigmaMinus, g.d11_sigma_minus);
    return ops;
}

Matrix h_atom_reduced(double detuning_uw, double zeeman) {
    Matrix h = Matrix::Zero(4, 4);
    h(1, 1) = -(detuning_uw + zeeman);
    h(2, 2) = -detuning_uw;
    h(3, 3) = -(detuning_uw - zeeman);
    return h;
}

// ---- time evolution -------------------------------------------------------

Matrix lindblad_rhs(const Matrix& h, const std::vector<CollapseOperator>& ops, const Matrix& rho) {
    Matrix d = std::complex<double>(0, -1) * (h * rho - rho * h);
    for (const auto& op : ops) {
        // C = sqrt(rate) |to><from|
        d(op.to, op.to) += op.rate * rho(op.from, op.from);
        d.row(op.from) -= (op.rate / 2.0) * rho.row(op.from);
        d.col(op.from) -= (op.rate / 2.0) * rho.col(op.from);
    }
    return d;
}

namespace {

double error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1,
                  const IntegratorOptions& o) {
    double worst = 0.0;
    for (int j = 0; j < err.cols(); ++j)
        for (int i = 0; i < err.rows(); ++i) {
            double scale = o.atol + o.rtol * std::max(std::abs(y0(i, j)), std::abs(y1(i, j)));
            double ratio = std::abs(err(i, j)) / scale;
            if (!std::isfinite(ratio)) return std::numeric_limits<double>::infinity();
            worst = std::max(worst, ratio);
        }
    return worst;
}

double rate_scale(const Matrix& h, const std::vector<CollapseOperator>& ops) {
    double s = 2.0 * h.cwiseAbs().rowwise().sum().maxCoeff();
    for (const auto& op : ops) s += 2.0 * op.rate;
    return s;
}

}  // namespace

Matrix evolve(const Matrix& rho0, const Matrix& h, const std::vector<CollapseOperator>& ops,
              double t, const IntegratorOptions& opts) {
    if (t < 0) throw std::invalid_argument("evolve: negative time");
    check_valid_state(rho0, 1e-8, 1e-7, 1e-7);
    if (t == 0) return rho0;

    // Dormand-Prince 5(4)
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    Matrix y = rho0;
    double scale = rate_scale(h, ops);
    double hstep = scale > 0 ? std::min(t, 0.5 / scale) : t;
    if (opts.max_step > 0) hstep = std::min(hstep, opts.max_step);
    const double hmin = t * 1e-14;
    double time = 0.0;
    double last_err = 0.0;

    while (time < t) {
        hstep = std::min(hstep, t - time);
        Matrix k1 = lindblad_rhs(h, ops, y);
        Matrix k2 = lindblad_rhs(h, ops, y + hstep * (a21 * k1));
        Matrix k3 = lindblad_rhs(h, ops, y + hstep * (a31 * k1 + a32 * k2));
        Matrix k4 = lindblad_rhs(h, ops, y + hstep * (a41 * k1 + a42 * k2 + a43 * k3));
        Matrix k5 = lindblad_rhs(h, ops, y + hstep * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        Matrix k6 = lindblad_rhs(
            h, ops, y + hstep * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Matrix ynew = y + hstep * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        Matrix k7 = lindblad_rhs(h, ops, ynew);
        Matrix err = hstep * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double en = error_norm(err, y, ynew, opts);
        last_err = en;
        if (en <= 1.0) {
            time += hstep;
            y = std::move(ynew);
        }
        double factor = en > 0 ? 0.9 * std::pow(en, -0.2) : 5.0;
        hstep *= std::clamp(factor, 0.2, 5.0);
        if (opts.max_step > 0) hstep = std::min(hstep, opts.max_step);
        if (hstep < hmin)
            throw IntegratorError("evolve: step size underflow", last_err);
    }

    // keep exact Hermiticity; the symmetric part is what the error control tracked
    y = ((y + y.adjoint()) / 2.0).eval();
    if (trace_error(y) > 1e-9 || min_eigenvalue(y) < -1e-9)
        throw IntegratorError("evolve: state validity lost beyond tolerance", trace_error(y));
    return y;
}

std::vector<Matrix> evolve_sampled(const Matrix& rho0, const Matrix& h,
                                   const std::vector<CollapseOperator>& ops,
                                   const std::vector<double>& times,
                                   const IntegratorOptions& opts) {
    std::vector<Matrix> out;
    out.reserve(times.size());
    Matrix y = rho0;
    double now = 0.0;
    for (double tk : times) {
        if (tk < now) throw std::invalid_argument("evolve_sampled: times must be non-decreasing");
        if (tk > now) y = evolve(y, h, ops, tk - now, opts);
        now = tk;
        out.push_back(y);
    }
    return out;
}

Matrix evolve_fixed_step(const Matrix& rho0, const Matrix& h,
                         const std::vector<CollapseOperator>& ops, double t, double dt) {
    Matrix y = rho0;
    long n = std::lround(std::ceil(t / dt));
    double hstep = t / double(n);
    for (long i = 0; i < n; ++i) {
        Matrix k1 = lindblad_rhs(h, ops, y);
        Matrix k2 = lindblad_rhs(h, ops, y + 0.5 * hstep * k1);
        Matrix k3 = lindblad_rhs(h, ops, y + 0.5 * hstep * k2);
        Matrix k4 = lindblad_rhs(h, ops, y + hstep * k3);
        y += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

double analytic_ramsey_rho22(double gamma, double detuning_uw, double t) {
    if (gamma < 0) throw std::domain_error("analytic_ramsey_rho22: negative rate");
    return 0.25 + 0.5 * std::exp(-gamma * t / 2.0) * std::cos(detuning_uw * t) +
           0.25 * std::exp(-2.0 * gamma * t / 3.0);
}

Matrix half_pi_pulse(int dim, double phase) {
    Matrix u = Matrix::Identity(dim, dim);
    const double c = std::cos(kPi / 4), s = std::sin(kPi / 4);
    std::complex<double> mi(0, -1);
    u(0, 0) = c;
    u(2, 2) = c;
    u(0, 2) = mi * s * std::exp(std::complex<double>(0, phase));
    u(2, 0) = mi * s * std::exp(std::complex<double>(0, -phase));
    return u;
}

}  // namespace aqm::lindblad
