#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace aqm::analysis {

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd parameters;
    Eigen::VectorXd errors;  // standard errors from the Jacobian at the optimum
    double residual_norm = 0.0;
    bool converged = false;
    std::vector<std::string> flags;

    double param(const std::string& name) const;
    double error(const std::string& name) const;
};

// model(params, x) -> prediction; optional analytic jacobian fills
// d(prediction)/d(param_j) for one x.
using Model = std::function<double(const Eigen::VectorXd&, double)>;
using ModelJacobian = std::function<void(const Eigen::VectorXd&, double, Eigen::VectorXd&)>;

struct LevmarOptions {
    int max_iterations = 200;
    double tolerance = 1e-12;     // relative step/cost stop
    double fd_step_scale = 1e-6;  // finite-difference step = scale * max(|p|, 1)
};

FitResult levmar(const Model& model, const std::vector<double>& x, const std::vector<double>& y,
                 Eigen::VectorXd initial, const std::vector<std::string>& names,
                 const ModelJacobian* jacobian = nullptr, const LevmarOptions& opts = {});

// f(T) = sin^2(w T + phi) alpha e^(-T/T2) + beta (1 - e^(-T/T2)) + C.
// Initial guesses: w from a periodogram peak, T2 from the log-contrast slope.
// Samples are (T, normalized fluorescence).
FitResult fit_ramsey_decay(const std::vector<std::pair<double, double>>& samples);

// Plain exponential a e^(-T/T2) for contrast traces.
FitResult fit_exponential_decay(const std::vector<std::pair<double, double>>& samples);

// Resample rows with replacement, apply the statistic, return the standard
// deviation over n_resamples. Deterministic for a fixed seed; statistic
// failures redraw the resample (capped).
double bootstrap(const std::vector<std::vector<double>>& dataset,
                 const std::function<double(const std::vector<std::vector<double>>&)>& statistic,
                 int n_resamples = 20, std::uint64_t seed = 0);

// Pumping-depletion response vs beam offset: S(x) = b + a exp(-k e^{-2(x-x0)^2/w^2}).
// Returns center x0 and waist w (plus the nuisance parameters).
FitResult fit_beam_position(const std::vector<std::pair<double, double>>& samples);

// 2-D Gaussian A exp(-(x-x0)^2/(2 sx^2) - (y-y0)^2/(2 sy^2)) + b on scattered samples.
struct Gauss2dSample {
    double x, y, value;
};
FitResult fit_gaussian_2d(const std::vector<Gauss2dSample>& samples);

}  // namespace aqm::analysis
