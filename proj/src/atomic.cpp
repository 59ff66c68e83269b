#include "aqm/atomic.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace aqm::atomic {

namespace {

// log(n!) table; angular momenta here are tiny but log accumulation keeps the
// Racah sums well-conditioned for the property tests' larger random inputs.
constexpr int kMaxFact = 128;

const double* log_fact_table() {
    static double table[kMaxFact];
    static std::once_flag once;
    std::call_once(once, [] {
        table[0] = 0.0;
        for (int n = 1; n < kMaxFact; ++n) table[n] = table[n - 1] + std::log(double(n));
    });
    return table;
}

double lf(int n) { return log_fact_table()[n]; }

// doubled representation: tj = 2j exactly
int to_doubled(double j, const char* what) {
    double t = 2.0 * j;
    double r = std::round(t);
    if (std::abs(t - r) > 1e-9) throw std::domain_error(std::string(what) + ": not a half-integer");
    return static_cast<int>(r);
}

bool triangle_ok(int ta, int tb, int tc) {
    if ((ta + tb + tc) % 2 != 0) return false;
    return tc >= std::abs(ta - tb) && tc <= ta + tb;
}

// log Delta(a,b,c) for doubled arguments; caller guarantees the triangle.
double log_delta(int ta, int tb, int tc) {
    return 0.5 * (lf((ta + tb - tc) / 2) + lf((ta - tb + tc) / 2) + lf((-ta + tb + tc) / 2) -
                  lf((ta + tb + tc) / 2 + 1));
}

}  // namespace

double wigner6j(double j1, double j2, double j3, double j4, double j5, double j6) {
    const int t1 = to_doubled(j1, "j1"), t2 = to_doubled(j2, "j2"), t3 = to_doubled(j3, "j3");
    const int t4 = to_doubled(j4, "j4"), t5 = to_doubled(j5, "j5"), t6 = to_doubled(j6, "j6");
    for (int t : {t1, t2, t3, t4, t5, t6})
        if (t < 0) throw std::domain_error("wigner6j: negative angular momentum");

    if (!triangle_ok(t1, t2, t3) || !triangle_ok(t1, t5, t6) || !triangle_ok(t4, t2, t6) ||
        !triangle_ok(t4, t5, t3))
        return 0.0;

    const double logpre = log_delta(t1, t2, t3) + log_delta(t1, t5, t6) +
                          log_delta(t4, t2, t6) + log_delta(t4, t5, t3);

    // Racah single sum; all the combinations below are integers by parity.
    const int s123 = (t1 + t2 + t3) / 2;
    const int s156 = (t1 + t5 + t6) / 2;
    const int s426 = (t4 + t2 + t6) / 2;
    const int s453 = (t4 + t5 + t3) / 2;
    const int p1245 = (t1 + t2 + t4 + t5) / 2;
    const int p2356 = (t2 + t3 + t5 + t6) / 2;
    const int p3146 = (t3 + t1 + t6 + t4) / 2;

    const int tmin = std::max({s123, s156, s426, s453});
    const int tmax = std::min({p1245, p2356, p3146});

    double sum = 0.0;
    for (int t = tmin; t <= tmax; ++t) {
        double logterm = lf(t + 1) - lf(t - s123) - lf(t - s156) - lf(t - s426) - lf(t - s453) -
                         lf(p1245 - t) - lf(p2356 - t) - lf(p3146 - t);
        double term = std::exp(logpre + logterm);
        sum += (t % 2 == 0) ? term : -term;
    }
    return sum;
}

double clebsch_gordan(double f, double mf, double fp, double mfp, double k, double q) {
    // <j1 m1 j2 m2 | J M> with j1=F', m1=mF', j2=k, m2=q, J=F, M=mF
    const int tj1 = to_doubled(fp, "F'"), tm1 = to_doubled(mfp, "mF'");
    const int tj2 = to_doubled(k, "k"), tm2 = to_doubled(q, "q");
    const int tJ = to_doubled(f, "F"), tM = to_doubled(mf, "mF");
    if (tj1 < 0 || tj2 < 0 || tJ < 0) throw std::domain_error("clebsch_gordan: negative momentum");
    if ((tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tJ + tM) % 2 != 0)
        throw std::domain_error("clebsch_gordan: m incompatible with j");

    if (tM != tm1 + tm2) return 0.0;
    if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tM) > tJ) return 0.0;
    if (!triangle_ok(tj1, tj2, tJ)) return 0.0;

    const double logpre =
        0.5 * std::log(double(tJ + 1)) + log_delta(tj1, tj2, tJ) +
        0.5 * (lf((tj1 + tm1) / 2) + lf((tj1 - tm1) / 2) + lf((tj2 + tm2) / 2) +
               lf((tj2 - tm2) / 2) + lf((tJ + tM) / 2) + lf((tJ - tM) / 2));

    const int a = (tj1 + tj2 - tJ) / 2;   // j1+j2-J
    const int b = (tj1 - tm1) / 2;        // j1-m1
    const int c = (tj2 + tm2) / 2;        // j2+m2
    const int d = (tJ - tj2 + tm1) / 2;   // J-j2+m1
    const int e = (tJ - tj1 - tm2) / 2;   // J-j1-m2

    const int kmin = std::max({0, -d, -e});
    const int kmax = std::min({a, b, c});

    double sum = 0.0;
    for (int s = kmin; s <= kmax; ++s) {
        double logterm = -(lf(s) + lf(a - s) + lf(b - s) + lf(c - s) + lf(d + s) + lf(e + s));
        double term = std::exp(logpre + logterm);
        sum += (s % 2 == 0) ? term : -term;
    }
    return sum;
}

const std::array<Level, 8>& LevelScheme::levels() const {
    static const std::array<Level, 8> kLevels = {{
        {false, 0, 0},
        {false, 1, -1},
        {false, 1, 0},
        {false, 1, 1},
        {true, 0, 0},
        {true, 1, -1},
        {true, 1, 0},
        {true, 1, 1},
    }};
    return kLevels;
}

int LevelScheme::index_of(bool p_manifold, int f, int mf) const {
    const auto& lv = levels();
    for (int i = 0; i < kDim; ++i)
        if (lv[i].p_manifold == p_manifold && lv[i].f == f && lv[i].mf == mf) return i;
    throw std::domain_error("no such level");
}

namespace {

Branch branch_of(int f_lower, int f_upper) {
    if (f_lower == 1 && f_upper == 1) return Branch::D1_11;
    if (f_lower == 1 && f_upper == 0) return Branch::D1_10;
    return Branch::D1_01;
}

std::vector<Transition> build_transitions(const LevelScheme& scheme) {
    std::vector<Transition> out;
    const auto& lv = scheme.levels();
    for (int g = 0; g < 4; ++g) {
        for (int e = 4; e < 8; ++e) {
            int q = lv[e].mf - lv[g].mf;
            if (std::abs(q) > 1) continue;
            Polarization pol = q == 0 ? Polarization::Pi
                                      : (q == 1 ? Polarization::SigmaPlus : Polarization::SigmaMinus);
            // J = J' = I = 1/2; the CG selection rule uses q_cg = m_g - m_e.
            double cg = clebsch_gordan(lv[g].f, lv[g].mf, lv[e].f, lv[e].mf, 1, lv[g].mf - lv[e].mf);
            double sixj = wigner6j(0.5, 0.5, 1.0, lv[e].f, lv[g].f, 0.5);
            double amp = cg * std::sqrt((2.0 * lv[e].f + 1.0) * 2.0) * sixj;
            bool allowed = std::abs(amp) > 1e-14;
            if (lv[g].f == 0 && lv[e].f == 0) allowed = false;  // F=0 -> F'=0
            out.push_back({g, e, pol, branch_of(lv[g].f, lv[e].f), allowed, allowed ? amp : 0.0});
        }
    }
    return out;
}

}  // namespace

const std::vector<Transition>& transitions(const LevelScheme& scheme) {
    static const std::vector<Transition> kTransitions = build_transitions(scheme);
    return kTransitions;
}

double structural_factor(const Transition& t) { return t.amplitude * t.amplitude; }

double rabi_frequency(double intensity_sat, const Transition& t, const AtomicParams& params) {
    if (intensity_sat < 0) throw std::domain_error("rabi_frequency: negative intensity");
    if (!t.allowed) return 0.0;
    return params.gamma * std::sqrt(intensity_sat / 2.0) * std::abs(t.amplitude);
}

double saturation_intensity(double gamma, double wavelength) {
    if (gamma <= 0 || wavelength <= 0)
        throw std::domain_error("saturation_intensity: non-positive input");
    return kPi * gamma * kSpeedOfLight * kPlanck / (3.0 * wavelength * wavelength * wavelength);
}

std::vector<DecayChannel> decay_branching(int upper, const LevelScheme& scheme,
                                          const AtomicParams& params) {
    if (upper < 4 || upper >= 8) throw std::domain_error("decay_branching: not a P level");
    std::vector<DecayChannel> out;
    double total_weight = 0.0;
    for (const auto& t : transitions(scheme))
        if (t.upper == upper && t.allowed) total_weight += t.amplitude * t.amplitude;
    for (const auto& t : transitions(scheme)) {
        if (t.upper != upper || !t.allowed) continue;
        out.push_back({t.lower, params.gamma * t.amplitude * t.amplitude / total_weight});
    }
    return out;
}

}  // namespace aqm::atomic
