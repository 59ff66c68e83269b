#pragma once

#include <array>
#include <vector>

#include "aqm/constants.hpp"

namespace aqm::atomic {

// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}. Arguments are non-negative
// half-integers; violated triangle conditions give 0, non-half-integer or
// negative input throws std::domain_error.
double wigner6j(double j1, double j2, double j3, double j4, double j5, double j6);

// Condon-Shortley <F,mF | F',mF'; k,q> coupling F' x k -> F.
// Zero unless mF = mF' + q.
double clebsch_gordan(double f, double mf, double fp, double mfp, double k, double q);

enum class Polarization { Pi, SigmaPlus, SigmaMinus };
enum class Branch { D1_11, D1_10, D1_01 };  // S(F=1)->P(F'=1), S(F=1)->P(F'=0), S(F=0)->P(F'=1)

struct Level {
    bool p_manifold;  // false: S1/2, true: P1/2
    int f;
    int mf;
};

// |0>..|7>: S(0,0) S(1,-1) S(1,0) S(1,+1) P(0,0) P(1,-1) P(1,0) P(1,+1).
// |0> = down (qubit), |2> = up.
struct LevelScheme {
    double zeeman_s = kTwoPi * 3.25e6;        // rad/s, S(F=1) splitting per m
    double zeeman_p = kTwoPi * 3.25e6 / 3.0;  // P1/2 g-factor is 1/3 of S1/2
    double hyperfine_s = kTwoPi * 12.642813e9;
    double hyperfine_p = kTwoPi * 2.105e9;

    static constexpr int kDim = 8;
    static constexpr int kDown = 0;
    static constexpr int kUp = 2;

    const std::array<Level, 8>& levels() const;
    int index_of(bool p_manifold, int f, int mf) const;
};

struct Transition {
    int lower;  // S level index
    int upper;  // P level index
    Polarization polarization;
    Branch branch;
    bool allowed;
    // Signed reduced amplitude: CG * sqrt((2F'+1)(2J+1)) * 6j * sqrt((2Je+1)/(2Jg+1)).
    // Squares to 1/3 for every allowed D1 transition.
    double amplitude;
};

// All 16 S<->P pairs with |q| <= 1, including the forbidden ones (allowed=false).
const std::vector<Transition>& transitions(const LevelScheme& scheme);

// The combined structural factor (2F'+1)(2J+1){6j}^2 (2Je+1)/(2Jg+1) |CG|^2.
double structural_factor(const Transition& t);

// Omega with Omega^2 = (I/I_sat) Gamma^2/6 for allowed transitions, 0 otherwise.
double rabi_frequency(double intensity_sat, const Transition& t, const AtomicParams& params);

// pi*Gamma*c*h / (3 lambda^3); throws on non-positive input.
double saturation_intensity(double gamma, double wavelength);

struct DecayChannel {
    int lower;
    double rate;  // rad/s, partial decay rate
};

// Spontaneous decay channels of a P level; partial rates sum to Gamma.
// Throws std::domain_error for an S-level index.
std::vector<DecayChannel> decay_branching(int upper, const LevelScheme& scheme,
                                          const AtomicParams& params);

}  // namespace aqm::atomic
