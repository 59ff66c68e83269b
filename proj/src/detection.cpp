#include "aqm/detection.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "aqm/rng.hpp"

namespace aqm::detection {

void DetectionModel::validate() const {
    if (r_bright < 0 || r_dark_pump < 0 || r_bright_pump < 0 || r_background < 0)
        throw std::invalid_argument("detection model: negative rate");
    if (efficiency <= 0 || efficiency > 1)
        throw std::invalid_argument("detection model: efficiency outside (0,1]");
    if (tau_d < 0) throw std::invalid_argument("detection model: negative detection time");
}

namespace {

// (1 - e^{-x})/x, stable at small x
double phi(double x) {
    if (std::abs(x) < 1e-4) return 1.0 - x / 2 + x * x / 6;
    return -std::expm1(-x) / x;
}

}  // namespace

double p_no_photon_bright(const DetectionModel& m, double t) {
    if (t < 0) throw std::invalid_argument("p_no_photon_bright: negative time");
    const double er = m.efficiency * m.r_bright;
    const double a = er + m.r_dark_pump;
    double darkened = m.r_dark_pump * t * phi(a * t);  // R_d/(eR_o+R_d) (1 - e^{-a t})
    double survived = std::exp(-m.r_dark_pump * t) * std::exp(-er * t);
    return std::exp(-m.r_background * t) * (darkened + survived);
}

double p_no_photon_bright_uncorrected(const DetectionModel& m, double t) {
    if (t < 0) throw std::invalid_argument("p_no_photon_bright: negative time");
    const double er = m.efficiency * m.r_bright;
    const double a = er + m.r_dark_pump;
    double darkened = m.r_dark_pump * t * phi(a * t);
    double survived = std::exp(-m.r_dark_pump * t) * std::exp(-m.r_bright * t);
    return std::exp(-m.r_background * t) * (darkened + survived);
}

double p_no_photon_dark(const DetectionModel& m, double t) {
    if (t < 0) throw std::invalid_argument("p_no_photon_dark: negative time");
    const double er = m.efficiency * m.r_bright;
    const double d = er - m.r_bright_pump;
    // R_b/(eR_o - R_b) (e^{-R_b t} - e^{-eR_o t}) = R_b t e^{-R_b t} phi(d t)
    double brightened = m.r_bright_pump * t * std::exp(-m.r_bright_pump * t) * phi(d * t);
    double stayed = std::exp(-m.r_bright_pump * t);
    return std::exp(-m.r_background * t) * (brightened + stayed);
}

double avg_detection_fidelity(const DetectionModel& m, double t) {
    return 0.5 * ((1.0 - p_no_photon_bright(m, t)) + p_no_photon_dark(m, t));
}

double first_photon_halving(double tau_raw) {
    if (tau_raw < 0) throw std::invalid_argument("first_photon_halving: negative time");
    return tau_raw / 2;
}

OptimalTime optimal_detection_time(const DetectionModel& m, double gamma_asset,
                                   const OptimalTimeOptions& opts) {
    m.validate();
    if (gamma_asset < 0) throw std::invalid_argument("optimal_detection_time: negative rate");

    auto product = [&](double t) {
        double exposure = opts.first_photon_halving ? first_photon_halving(t) : t;
        double f_asset = 2.0 / 3 * std::exp(-gamma_asset * exposure / 2.0) + 1.0 / 3;
        return avg_detection_fidelity(m, t) * f_asset;
    };

    // grid scan, then check unimodality by counting strict local maxima
    std::vector<double> ts(size_t(opts.grid)), fs(size_t(opts.grid));
    for (int i = 0; i < opts.grid; ++i) {
        ts[size_t(i)] = opts.t_min + (opts.t_max - opts.t_min) * i / (opts.grid - 1);
        fs[size_t(i)] = product(ts[size_t(i)]);
    }
    int best = 0;
    int maxima = 0;
    for (int i = 0; i < opts.grid; ++i) {
        if (fs[size_t(i)] > fs[size_t(best)]) best = i;
        if (i > 0 && i + 1 < opts.grid && fs[size_t(i)] > fs[size_t(i - 1)] &&
            fs[size_t(i)] > fs[size_t(i + 1)])
            ++maxima;
    }
    bool unimodal = maxima <= 1 && best > 0 && best + 1 < opts.grid;
    if (!unimodal) return {ts[size_t(best)], false, fs[size_t(best)]};

    // golden-section refinement inside the bracketing interval
    const double gr = (std::sqrt(5.0) - 1) / 2;
    double a = ts[size_t(best - 1)], b = ts[size_t(best + 1)];
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = product(x1), f2 = product(x2);
    for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = product(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = product(x1);
        }
    }
    double tau = (a + b) / 2;
    return {tau, true, product(tau)};
}

namespace {

bool telegraph_trial(const DetectionModel& m, double t, bool bright, Rng& rng) {
    double now = 0.0;
    while (now < t) {
        double switch_rate = bright ? m.r_dark_pump : m.r_bright_pump;
        double detect_rate = m.r_background + (bright ? m.efficiency * m.r_bright : 0.0);
        double t_switch = switch_rate > 0 ? rng.exponential(switch_rate) : 2 * (t - now) + 1;
        double t_photon = detect_rate > 0 ? rng.exponential(detect_rate) : 2 * (t - now) + 1;
        if (t_photon < t_switch && now + t_photon <= t) return false;  // a photon arrived
        if (now + t_switch > t) return true;
        now += t_switch;
        bright = !bright;
    }
    return true;
}

}  // namespace

McEstimate telegraph_no_photon_probability(const DetectionModel& m, double t, bool bright_initial,
                                           long trials, std::uint64_t seed, ExecMode mode) {
    m.validate();
    if (trials <= 0) throw std::invalid_argument("telegraph: trials must be positive");
    long zeros = 0;
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for reduction(+ : zeros) schedule(static)
        for (long i = 0; i < trials; ++i) {
            Rng rng = Rng::stream(seed, std::uint64_t(i));
            if (telegraph_trial(m, t, bright_initial, rng)) ++zeros;
        }
    } else {
        for (long i = 0; i < trials; ++i) {
            Rng rng = Rng::stream(seed, std::uint64_t(i));
            if (telegraph_trial(m, t, bright_initial, rng)) ++zeros;
        }
    }
    double p = double(zeros) / double(trials);
    double sigma = std::sqrt(std::max(p * (1 - p), 1.0 / double(trials)) / double(trials));
    return {p, sigma};
}

}  // namespace aqm::detection
