#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aqm/analysis.hpp"
#include "aqm/constants.hpp"
#include "aqm/fft.hpp"

namespace aqm::holography {

using fft::Complex;
using fft::Grid;

// Real-valued row-major map (pupil amplitude or phase).
struct RealGrid {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;
    double pitch = 0.0;       // m per sample
    double wavelength = 0.0;  // m

    RealGrid() = default;
    RealGrid(int r, int c, double pitch_m = 0.0, double lambda_m = 0.0)
        : rows(r), cols(c), data(size_t(r) * size_t(c), 0.0), pitch(pitch_m),
          wavelength(lambda_m) {}
    double& at(int r, int c) { return data[size_t(r) * size_t(cols) + size_t(c)]; }
    const double& at(int r, int c) const { return data[size_t(r) * size_t(cols) + size_t(c)]; }
};

// Fourier-plane field: measured-style Gaussian amplitude and aberration phase
// over an N x N grid, plus the optical parameters that map it to the ion plane.
struct PupilField {
    RealGrid amplitude;
    RealGrid phase;
    double na = 0.16;
    double focal_length = 24e-3;

    int size() const { return amplitude.rows; }
    double pitch() const { return amplitude.pitch; }
    double wavelength() const { return amplitude.wavelength; }
    // ion-plane sample spacing lambda f / (N pitch)
    double image_pitch() const;
    void validate() const;
};

// Gaussian pupil sized to produce waist w at the ion plane, NA-truncated,
// with optional phase map; the workhorse for the diffraction-limited model.
PupilField make_gaussian_pupil(int n, double pitch, double wavelength, double waist,
                               double na = 0.16, double focal_length = 24e-3);

struct TargetField {
    double waist = 1.5e-6;   // m
    double offset = 6e-6;    // m from the first-order axis
    double scale = 4.0 / kPi;  // binarization pre-scale
};

struct BinaryHologram {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> on;
    int carrier_period = 4;  // px

    std::uint8_t& at(int r, int c) { return on[size_t(r) * size_t(cols) + size_t(c)]; }
    std::uint8_t at(int r, int c) const { return on[size_t(r) * size_t(cols) + size_t(c)]; }
};

// Unitary far-field propagation (centered conventions); Parseval holds to
// rounding.
Grid propagate(const Grid& pupil_plane, ExecMode mode = ExecMode::Parallel);
Grid propagate_inverse(const Grid& image_plane, ExecMode mode = ExecMode::Parallel);

struct IftaOptions {
    int binary_refinements = 8;
    int carrier_period = 8;
    double refinement_damping = 0.5;  // weight of the new modulation per update
    double window_radius_waists = 6.0;
    double gain_factor = 0.25;  // target amplitude vs the encodable maximum
    ExecMode mode = ExecMode::Parallel;
};

struct IftaResult {
    BinaryHologram hologram;
    std::vector<double> window_error;      // continuous-phase error per iteration
    std::vector<double> refine_crosstalk;  // binary-loop crosstalk per refinement
    double crosstalk;                      // I(first-order axis) / I(target peak)
    double signal_power;               // first-order power inside the window
};

// Binary carrier hologram whose first diffraction order approximates the
// shifted-Gaussian target through the (aberrated) pupil.
IftaResult ifta_generate(const TargetField& target, const PupilField& pupil, int iterations,
                         const IftaOptions& opts = {});

// Propagate a binary hologram through the pupil (amplitude, aberration phase)
// and return the image-plane field. The relay that follows the DMD passes the
// first diffraction order and blocks the rest; order_filter models that
// aperture (disc of half the order spacing around the +1 order).
Grid propagate_hologram(const BinaryHologram& holo, const PupilField& pupil,
                        bool order_filter = true, ExecMode mode = ExecMode::Parallel);

// (4/pi)/k for odd k, 0 for even k.
double square_wave_fundamental(int k);

struct PupilPatch {
    double center_x = 0.0;  // normalized to the NA disc
    double center_y = 0.0;
    double radius = 0.1;
};

struct PhaseSensingOptions {
    double pumping_depth = 2.0;  // k I0: mean pumping exponent at mid-fringe
    double fixed_k = 0.0;        // absolute pumping constant; 0 derives it from pumping_depth
    int grid_oversampling = 64;  // patch quadrature per axis
};

struct PhaseSensingResult {
    double phase;            // recovered patch-B minus patch-A phase, in (-pi, pi]
    double fringe_amplitude; // of the fitted sinusoid, in fluorescence units
    double pumping_k;        // pumping constant actually used
};

// Sweep the phase of patch B, pump the ion for a fixed time at each step, fit
// the fluorescence fringe, return the phase difference between the patches.
PhaseSensingResult simulate_phase_sensing(const PupilField& pupil, const PupilPatch& patch_a,
                                          const PupilPatch& patch_b,
                                          const std::vector<double>& phase_grid,
                                          const PhaseSensingOptions& opts = {});

// 2-D Gaussian fit of the pupil amplitude from per-patch intensity samples;
// the square root of the intensity is the field amplitude that gets fitted.
// Rank-deficient (constant) profiles are an error.
struct IntensitySample {
    double x, y, intensity;
};
analysis::FitResult fit_pupil_amplitude(const std::vector<IntensitySample>& samples);

// Least-squares plane removal (piston and tilt) in place.
void remove_tilt_piston(RealGrid& phase);

}  // namespace aqm::holography
