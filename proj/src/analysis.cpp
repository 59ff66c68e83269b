#include "aqm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aqm/constants.hpp"
#include "aqm/rng.hpp"

namespace aqm::analysis {

double FitResult::param(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return parameters(long(i));
    throw std::out_of_range("no fit parameter named " + name);
}

double FitResult::error(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return errors(long(i));
    throw std::out_of_range("no fit parameter named " + name);
}

namespace {

Eigen::MatrixXd numeric_jacobian(const Model& model, const std::vector<double>& x,
                                 const Eigen::VectorXd& p, double step_scale) {
    Eigen::MatrixXd jac(long(x.size()), p.size());
    for (int j = 0; j < p.size(); ++j) {
        double h = step_scale * std::max(std::abs(p(j)), 1.0);
        Eigen::VectorXd lo = p, hi = p;
        lo(j) -= h;
        hi(j) += h;
        for (size_t i = 0; i < x.size(); ++i)
            jac(long(i), j) = (model(hi, x[i]) - model(lo, x[i])) / (2 * h);
    }
    return jac;
}

}  // namespace

FitResult levmar(const Model& model, const std::vector<double>& x, const std::vector<double>& y,
                 Eigen::VectorXd p, const std::vector<std::string>& names,
                 const ModelJacobian* jacobian, const LevmarOptions& opts) {
    if (x.size() != y.size() || x.empty()) throw std::invalid_argument("levmar: bad data");
    const long n = long(x.size());
    const int m = int(p.size());

    auto residual = [&](const Eigen::VectorXd& q) {
        Eigen::VectorXd r(n);
        for (long i = 0; i < n; ++i) r(i) = y[size_t(i)] - model(q, x[size_t(i)]);
        return r;
    };

    Eigen::VectorXd r = residual(p);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    bool converged = false;

    for (int it = 0; it < opts.max_iterations; ++it) {
        Eigen::MatrixXd jac;
        if (jacobian) {
            jac.resize(n, m);
            Eigen::VectorXd row(m);
            for (long i = 0; i < n; ++i) {
                (*jacobian)(p, x[size_t(i)], row);
                jac.row(i) = row;
            }
        } else {
            jac = numeric_jacobian(model, x, p, opts.fd_step_scale);
        }

        Eigen::MatrixXd jtj = jac.transpose() * jac;
        Eigen::VectorXd jtr = jac.transpose() * r;

        bool stepped = false;
        for (int attempt = 0; attempt < 30; ++attempt) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            Eigen::VectorXd delta = a.ldlt().solve(jtr);
            Eigen::VectorXd pnew = p + delta;
            Eigen::VectorXd rnew = residual(pnew);
            double cnew = rnew.squaredNorm();
            if (cnew < cost) {
                double rel = (cost - cnew) / std::max(cost, 1e-300);
                p = pnew;
                r = rnew;
                cost = cnew;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (rel < opts.tolerance || delta.cwiseAbs().maxCoeff() <
                                                opts.tolerance * (1.0 + p.cwiseAbs().maxCoeff()))
                    converged = true;
                break;
            }
            lambda *= 10;
            if (lambda > 1e14) break;
        }
        if (converged || !stepped) {
            converged = converged || cost == 0.0 || !stepped;
            break;
        }
    }

    FitResult out;
    out.names = names;
    out.parameters = p;
    out.residual_norm = std::sqrt(cost);
    out.converged = converged;

    // standard errors: sigma^2 (J^T J)^-1 with sigma^2 = cost/(n-m)
    Eigen::MatrixXd jac = jacobian ? Eigen::MatrixXd() : numeric_jacobian(model, x, p, opts.fd_step_scale);
    if (jacobian) {
        jac.resize(n, m);
        Eigen::VectorXd row(m);
        for (long i = 0; i < n; ++i) {
            (*jacobian)(p, x[size_t(i)], row);
            jac.row(i) = row;
        }
    }
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    double dof = std::max(1.0, double(n - m));
    Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse() * (cost / dof);
    out.errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    return out;
}

namespace {

// crude periodogram: strongest least-squares sinusoid on a frequency grid
double periodogram_peak(const std::vector<std::pair<double, double>>& samples) {
    double tmin = samples.front().first, tmax = samples.back().first;
    double mean = 0;
    for (auto& s : samples) mean += s.second;
    mean /= double(samples.size());
    double best_w = 0, best_power = -1;
    double span = std::max(tmax - tmin, 1e-12);
    // up to half the Nyquist of the median spacing
    std::vector<double> dts;
    for (size_t i = 1; i < samples.size(); ++i)
        dts.push_back(samples[i].first - samples[i - 1].first);
    std::nth_element(dts.begin(), dts.begin() + long(dts.size()) / 2, dts.end());
    double dt = dts[dts.size() / 2];
    double wmax = kPi / dt;
    int ngrid = 2000;
    for (int k = 1; k <= ngrid; ++k) {
        double w = wmax * k / ngrid;
        if (w * span < kPi) continue;  // need at least half a period
        double cs = 0, sn = 0;
        for (auto& s : samples) {
            cs += (s.second - mean) * std::cos(w * s.first);
            sn += (s.second - mean) * std::sin(w * s.first);
        }
        double power = cs * cs + sn * sn;
        if (power > best_power) {
            best_power = power;
            best_w = w;
        }
    }
    return best_w;
}

}  // namespace

FitResult fit_ramsey_decay(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 6) throw std::invalid_argument("fit_ramsey_decay: need >= 6 samples");
    auto sorted = samples;
    std::sort(sorted.begin(), sorted.end());

    // P(up) oscillates at the detuning; the sin^2 argument runs at half of it.
    double w_signal = periodogram_peak(sorted);
    double w0 = w_signal / 2;

    // T2 guess from the fringe amplitude (spread around the window mean) decay
    auto envelope = [&](size_t lo, size_t hi) {
        double mean = 0;
        for (size_t i = lo; i < hi; ++i) mean += sorted[i].second;
        mean /= double(hi - lo);
        double acc = 0;
        for (size_t i = lo; i < hi; ++i) acc = std::max(acc, std::abs(sorted[i].second - mean));
        return std::max(acc, 1e-4);
    };
    size_t third = std::max<size_t>(sorted.size() / 3, 2);
    double early = envelope(0, third), late = envelope(sorted.size() - third, sorted.size());
    double tspan = sorted.back().first - sorted.front().first;
    double t2_guess = late < early ? tspan / std::log(early / late) : tspan;
    t2_guess = std::clamp(t2_guess, tspan / 50, tspan * 50);

    std::vector<double> xs, ys;
    for (auto& s : sorted) {
        xs.push_back(s.first);
        ys.push_back(s.second);
    }

    Model model = [](const Eigen::VectorXd& p, double t) {
        double s = std::sin(p(0) * t + p(1));
        double decay = std::exp(-t / p(2));
        return s * s * p(3) * decay + p(4) * (1 - decay) + p(5);
    };
    ModelJacobian jac = [](const Eigen::VectorXd& p, double t, Eigen::VectorXd& row) {
        double arg = p(0) * t + p(1);
        double s = std::sin(arg), c = std::cos(arg);
        double decay = std::exp(-t / p(2));
        row(0) = 2 * s * c * t * p(3) * decay;
        row(1) = 2 * s * c * p(3) * decay;
        row(2) = (s * s * p(3) - p(4)) * decay * t / (p(2) * p(2));
        row(3) = s * s * decay;
        row(4) = 1 - decay;
        row(5) = 1;
    };

    FitResult best;
    double best_cost = 1e300;
    // sign of alpha and the sin^2 phase trade off; take the best of a few starts
    for (double alpha : {-1.0, 1.0}) {
        for (double phi : {0.0, kPi / 4, kPi / 2, 3 * kPi / 4}) {
            Eigen::VectorXd p(6);
            double beta = alpha < 0 ? -0.75 : 0.25;
            double c = alpha < 0 ? 1.0 : 0.0;
            p << w0, phi, t2_guess, alpha, beta, c;
            FitResult r =
                levmar(model, xs, ys, p, {"omega", "phi", "T2", "alpha", "beta", "C"}, &jac);
            if (r.residual_norm < best_cost) {
                best_cost = r.residual_norm;
                best = r;
            }
        }
    }
    if (best.parameters(2) < 0) {
        best.parameters(2) = std::abs(best.parameters(2));
        best.flags.push_back("negative-T2-folded");
    }
    double tmax = sorted.back().first;
    if (best.param("T2") > 20 * tmax) best.flags.push_back("T2-beyond-fit-window");
    return best;
}

FitResult fit_exponential_decay(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 2) throw std::invalid_argument("fit_exponential_decay: need >= 2 samples");
    std::vector<double> xs, ys;
    for (auto& s : samples) {
        xs.push_back(s.first);
        ys.push_back(s.second);
    }
    double tspan = xs.back() - xs.front();
    double ratio = std::max(ys.front(), 1e-12) / std::max(ys.back(), 1e-12);
    double t2 = ratio > 1 ? tspan / std::log(ratio) : tspan;
    Model model = [](const Eigen::VectorXd& p, double t) { return p(0) * std::exp(-t / p(1)); };
    Eigen::VectorXd p0(2);
    p0 << ys.front(), std::clamp(t2, tspan * 1e-3, tspan * 1e3);
    return levmar(model, xs, ys, p0, {"amplitude", "T2"});
}

double bootstrap(const std::vector<std::vector<double>>& dataset,
                 const std::function<double(const std::vector<std::vector<double>>&)>& statistic,
                 int n_resamples, std::uint64_t seed) {
    if (dataset.empty()) throw std::invalid_argument("bootstrap: empty dataset");
    std::vector<double> values;
    values.reserve(size_t(n_resamples));
    for (int k = 0; k < n_resamples; ++k) {
        double v = 0;
        bool ok = false;
        for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
            Rng rng = Rng::stream(seed, std::uint64_t(k) * 8 + std::uint64_t(attempt));
            std::vector<std::vector<double>> resample;
            resample.reserve(dataset.size());
            for (size_t i = 0; i < dataset.size(); ++i)
                resample.push_back(dataset[rng.below(dataset.size())]);
            try {
                v = statistic(resample);
                ok = std::isfinite(v);
            } catch (const std::exception&) {
                ok = false;
            }
        }
        if (!ok) throw std::runtime_error("bootstrap: statistic kept failing on resamples");
        values.push_back(v);
    }
    double mean = 0;
    for (double v : values) mean += v;
    mean /= double(values.size());
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= std::max<double>(1.0, double(values.size()) - 1);
    return std::sqrt(var);
}

FitResult fit_beam_position(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 5) throw std::invalid_argument("fit_beam_position: need >= 5 samples");
    auto sorted = samples;
    std::sort(sorted.begin(), sorted.end());

    // depletion is strongest at the beam center; require the extremum inside the scan
    size_t imin = 0;
    for (size_t i = 0; i < sorted.size(); ++i)
        if (sorted[i].second < sorted[imin].second) imin = i;
    if (imin == 0 || imin + 1 == sorted.size())
        throw std::invalid_argument("fit_beam_position: scan does not bracket the beam");

    double smax = sorted[0].second;
    for (auto& s : sorted) smax = std::max(smax, s.second);
    double smin = sorted[imin].second;

    std::vector<double> xs, ys;
    for (auto& s : sorted) {
        xs.push_back(s.first);
        ys.push_back(s.second);
    }

    // S(x) = b + a exp(-k e^{-2 (x-x0)^2 / w^2})
    Model model = [](const Eigen::VectorXd& p, double x) {
        double g = std::exp(-2 * (x - p(0)) * (x - p(0)) / (p(1) * p(1)));
        return p(3) + p(2) * std::exp(-p(4) * g);
    };

    double span = xs.back() - xs.front();
    Eigen::VectorXd p0(5);
    p0 << sorted[imin].first, span / 4, smax, 0.0, std::log(std::max(smax / std::max(smin, 1e-9), 1.001));

    auto result = levmar(model, xs, ys, p0, {"center", "waist", "amplitude", "offset", "depth"});
    result.parameters(1) = std::abs(result.parameters(1));
    return result;
}

FitResult fit_gaussian_2d(const std::vector<Gauss2dSample>& samples) {
    if (samples.size() < 6) throw std::invalid_argument("fit_gaussian_2d: need >= 6 samples");

    double vmax = samples[0].value, vmin = samples[0].value;
    double cx = 0, cy = 0, norm = 0;
    for (auto& s : samples) {
        vmax = std::max(vmax, s.value);
        vmin = std::min(vmin, s.value);
        double wgt = std::max(s.value, 0.0);
        cx += wgt * s.x;
        cy += wgt * s.y;
        norm += wgt;
    }
    if (vmax - vmin < 1e-12 * std::max(std::abs(vmax), 1.0))
        throw std::invalid_argument("fit_gaussian_2d: constant profile (degenerate width)");
    if (norm > 0) {
        cx /= norm;
        cy /= norm;
    }
    double sx = 0, sy = 0;
    for (auto& s : samples) {
        double wgt = std::max(s.value, 0.0);
        sx += wgt * (s.x - cx) * (s.x - cx);
        sy += wgt * (s.y - cy) * (s.y - cy);
    }
    sx = std::sqrt(sx / std::max(norm, 1e-12));
    sy = std::sqrt(sy / std::max(norm, 1e-12));

    std::vector<double> xs(samples.size()), ys(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) xs[i] = double(i);
    // pack (x,y) lookup through the model closure
    Model model = [&samples](const Eigen::VectorXd& p, double idx) {
        const auto& s = samples[size_t(idx)];
        double ex = (s.x - p(1)) / p(3);
        double ey = (s.y - p(2)) / p(4);
        return p(0) * std::exp(-0.5 * (ex * ex + ey * ey)) + p(5);
    };
    for (size_t i = 0; i < samples.size(); ++i) ys[i] = samples[i].value;

    Eigen::VectorXd p0(6);
    p0 << vmax - vmin, cx, cy, std::max(sx, 1e-9), std::max(sy, 1e-9), vmin;
    auto result = levmar(model, xs, ys, p0, {"amplitude", "x0", "y0", "sigma_x", "sigma_y", "offset"});
    result.parameters(3) = std::abs(result.parameters(3));
    result.parameters(4) = std::abs(result.parameters(4));
    if (result.param("sigma_x") > 1e3 * (std::abs(sx) + 1e-12) ||
        result.param("sigma_y") > 1e3 * (std::abs(sy) + 1e-12))
        result.flags.push_back("degenerate-width");
    return result;
}

}  // namespace aqm::analysis
