#pragma once

#include <cstdint>
#include <vector>

#include "aqm/analysis.hpp"
#include "aqm/lindblad.hpp"

namespace aqm::protocols {

using lindblad::Matrix;
using lindblad::ProbeBeam;

struct RamseyConfig {
    double detuning_uw = kTwoPi * 10e3;  // rad/s
    double pulse_duration = 6e-6;        // used by the finite-pulse mode
    bool ideal_pulses = true;
    std::vector<double> wait_grid;
    ProbeBeam probe;          // leaked intensity at the asset ion
    int repetitions = 200;
    bool shot_noise = false;  // binomial sampling of the readout
    std::uint64_t seed = 0;
    bool full_model = false;  // 8-level coherent probe instead of the weak table
    atomic::LevelScheme scheme;
    AtomicParams params;
};

struct RamseyResult {
    std::vector<double> wait;
    std::vector<double> p_up;      // normalized fluorescence
    std::vector<double> contrast;  // R_c(T)
    double t2_star = 0.0;
    double t2_star_err = 0.0;
    analysis::FitResult fit;
};

// prepare |0>, pi/2, evolve with the probe for T, pi/2, read rho22.
// Contrast is the fringe amplitude at fixed T (the max-min over the analysis
// phase, which equals 2|rho_02| just before the second pulse).
RamseyResult simulate_ramsey(const RamseyConfig& cfg);

// Five 21-point intervals of 200 us span placed across [10 us, 2 T2_coarse].
// Falls back to a uniform 105-point grid when the intervals would overlap.
std::vector<double> sample_wait_grid(double t2_coarse);

struct ResetResult {
    Matrix rho;
    std::vector<double> times;
    std::vector<double> fluorescence;  // Gamma x P-manifold population
};

// Full 8-level optical pumping under a (D1(11)-dominated) probe.
ResetResult simulate_reset(const Matrix& rho0, const ProbeBeam& probe, double duration,
                           const atomic::LevelScheme& scheme = {}, const AtomicParams& params = {},
                           int samples = 240);

struct ResetTime {
    double t1;      // 1/e fluorescence decay time
    double tau_op;  // 7 T1
};

// T1 from the 1/e point of the simulated fluorescence of an ion starting in
// |2>; throws std::runtime_error("no reset...") when the drive does not pump.
ResetTime reset_time(const ProbeBeam& probe, const atomic::LevelScheme& scheme = {},
                     const AtomicParams& params = {});

struct DetectionIllumination {
    Matrix rho;
    std::vector<double> times;
    std::vector<double> scattering_rate;  // Gamma x P population
};

DetectionIllumination simulate_detection_illumination(const Matrix& rho0, const ProbeBeam& probe,
                                                      double tau_d,
                                                      const atomic::LevelScheme& scheme = {},
                                                      const AtomicParams& params = {},
                                                      int samples = 160);

// Quasi-steady bright-ion scattering rate under a detection probe (after the
// Gamma-scale transient, before slow off-resonant pumping matters).
double steady_state_scattering_rate(const ProbeBeam& probe,
                                    const atomic::LevelScheme& scheme = {},
                                    const AtomicParams& params = {});

}  // namespace aqm::protocols
