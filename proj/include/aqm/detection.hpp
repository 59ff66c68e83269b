#pragma once

#include <cstdint>

#include "aqm/constants.hpp"
#include "aqm/parallel.hpp"

namespace aqm::detection {

// Photon-counting model of process-qubit state detection. Rates are those of
// the fast-detection apparatus at I2 = I_sat with detection-optimal
// polarization; R_b/R_d defaults come from the off-resonant pumping rates of
// this library's own level model.
struct DetectionModel {
    double r_bright = 2.6e7;     // R_o, bright scattering rate (1/s)
    double r_dark_pump = 100.0;  // R_d, bright -> dark
    double r_bright_pump = 12.0; // R_b, dark -> bright
    double r_background = 0.0;   // R_bg, detector background
    double efficiency = 0.04;    // net detection efficiency
    double tau_d = 11e-6;

    void validate() const;
};

// P_{t,up}(n=0), one-way-switch closed form with the corrected efficiency
// factor inside the second exponent.
double p_no_photon_bright(const DetectionModel& m, double t);

// The (typo) variant without the efficiency factor, kept for comparison.
double p_no_photon_bright_uncorrected(const DetectionModel& m, double t);

// P_{t,down}(n=0); the epsilon R_o == R_b singularity is removable and
// evaluated by limit.
double p_no_photon_dark(const DetectionModel& m, double t);

// F = [(1 - P_up(0)) + P_down(0)] / 2.
double avg_detection_fidelity(const DetectionModel& m, double t);

// Exposure accounting of the first-photon early-completion strategy.
double first_photon_halving(double tau_raw);

struct OptimalTime {
    double tau;
    bool unimodal;         // false: grid-exhaustive result
    double best_product;
};

struct OptimalTimeOptions {
    double t_min = 2e-7;
    double t_max = 2e-4;
    int grid = 1200;
    bool first_photon_halving = true;  // halves the asset exposure
};

// argmax over t of avg_detection_fidelity(t) x [(2/3) e^(-t_eff gamma/2) + 1/3]
// with t_eff = t/2 under the early-completion strategy and T2* = 2/gamma.
OptimalTime optimal_detection_time(const DetectionModel& m, double gamma_asset,
                                   const OptimalTimeOptions& opts = {});

struct McEstimate {
    double p;      // fraction of trials with zero detected photons
    double sigma;  // binomial standard error
};

// Two-state telegraph process with Poisson photon emission; the independent
// oracle for the closed forms. Deterministic for a fixed seed regardless of
// thread count.
McEstimate telegraph_no_photon_probability(const DetectionModel& m, double t, bool bright_initial,
                                           long trials, std::uint64_t seed,
                                           ExecMode mode = ExecMode::Parallel);

}  // namespace aqm::detection
