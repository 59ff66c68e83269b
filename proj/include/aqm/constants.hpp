#pragma once

#include <cmath>

namespace aqm {

inline constexpr double kPlanck = 6.62607015e-34;        // J s
inline constexpr double kHbar = 1.054571817e-34;         // J s
inline constexpr double kSpeedOfLight = 2.99792458e8;    // m/s
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// 171Yb+ S1/2 <-> P1/2 parameters. The linewidth and wavelength are the
// literature-standard values; everything derived (I_sat, photon energy)
// follows from whatever the caller sets here.
struct AtomicParams {
    double gamma = kTwoPi * 19.6e6;   // P1/2 decay rate, rad/s
    double wavelength = 369.5e-9;     // m

    double saturation_intensity() const {
        return kPi * gamma * kSpeedOfLight * kPlanck /
               (3.0 * wavelength * wavelength * wavelength);
    }
    double photon_energy() const { return kPlanck * kSpeedOfLight / wavelength; }
};

}  // namespace aqm
