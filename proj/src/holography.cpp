#include "aqm/holography.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "aqm/constants.hpp"

namespace aqm::holography {

double PupilField::image_pitch() const {
    return wavelength() * focal_length / (size() * pitch());
}

void PupilField::validate() const {
    if (amplitude.rows != phase.rows || amplitude.cols != phase.cols)
        throw std::invalid_argument("pupil: amplitude/phase dimensions differ");
    if (amplitude.rows != amplitude.cols) throw std::invalid_argument("pupil: square grid required");
    for (double a : amplitude.data)
        if (a < 0) throw std::invalid_argument("pupil: negative amplitude");
    if (na <= 0 || na >= 1) throw std::invalid_argument("pupil: NA outside (0,1)");
}

PupilField make_gaussian_pupil(int n, double pitch, double wavelength, double waist, double na,
                               double focal_length) {
    PupilField p;
    p.amplitude = RealGrid(n, n, pitch, wavelength);
    p.phase = RealGrid(n, n, pitch, wavelength);
    p.na = na;
    p.focal_length = focal_length;
    const double r0 = wavelength * focal_length / (kPi * waist);  // 1/e field radius
    const double r_na = focal_length * na;
    for (int r = 0; r < n; ++r) {
        double y = (r - n / 2) * pitch;
        for (int c = 0; c < n; ++c) {
            double x = (c - n / 2) * pitch;
            double rr = x * x + y * y;
            p.amplitude.at(r, c) = rr <= r_na * r_na ? std::exp(-rr / (r0 * r0)) : 0.0;
        }
    }
    return p;
}

Grid propagate(const Grid& pupil_plane, ExecMode mode) {
    Grid g = pupil_plane;
    fft::fftshift(g);
    fft::fft2d(g, false, mode);
    fft::fftshift(g);
    return g;
}

Grid propagate_inverse(const Grid& image_plane, ExecMode mode) {
    Grid g = image_plane;
    fft::fftshift(g);
    fft::fft2d(g, true, mode);
    fft::fftshift(g);
    return g;
}

namespace {

Grid pupil_to_grid(const PupilField& pupil) {
    const int n = pupil.size();
    Grid g(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            g.at(r, c) = pupil.amplitude.at(r, c) *
                         std::exp(Complex(0, pupil.phase.at(r, c)));
    return g;
}

struct ImageWindow {
    int cx, cy, radius_px;
    bool contains(int r, int c) const {
        double dr = r - cy, dc = c - cx;
        return dr * dr + dc * dc <= double(radius_px) * double(radius_px);
    }
};

}  // namespace

IftaResult ifta_generate(const TargetField& target, const PupilField& pupil, int iterations,
                         const IftaOptions& opts) {
    pupil.validate();
    if (iterations < 1) throw std::invalid_argument("ifta: iterations >= 1");
    const int n = pupil.size();
    const double q = pupil.image_pitch();

    // The modulation field m(u) is designed against its own image (spot at
    // offset d from center); the binarization carrier then translates the
    // physical first order by n/carrier_period pixels.
    const int carrier_px = n / opts.carrier_period;
    const int d_px = int(std::lround(target.offset / q));
    const int cx_mod = n / 2 + d_px;          // spot in modulation space
    const int cx_phys = cx_mod + carrier_px;  // spot in the relayed image
    const int axis_phys = n / 2 + carrier_px; // asset ion: first-order axis
    const int cy = n / 2;
    const double w_px = target.waist / q;
    const int win_px = int(std::lround(opts.window_radius_waists * w_px));
    if (cx_phys + win_px >= axis_phys + carrier_px / 2 || d_px - win_px < -carrier_px / 2 ||
        cx_phys + win_px >= n)
        throw std::invalid_argument("ifta: target outside the addressable band");
    ImageWindow window_mod{cx_mod, cy, win_px};
    ImageWindow window_phys{cx_phys, cy, win_px};

    // target amplitude (field), peak 1 before gain
    Grid target_field(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            double dr = (r - cy), dc = (c - cx_mod);
            double rr = (dr * dr + dc * dc) / (w_px * w_px);
            target_field.at(r, c) = rr < 40 ? std::exp(-rr) : 0.0;
        }

    Grid pupil_ideal = pupil_to_grid(pupil);
    double pupil_energy = pupil_ideal.energy();
    double target_energy = 0;
    for (const auto& z : target_field.data) target_energy += std::norm(z);
    const double base_gain = opts.gain_factor * std::sqrt(pupil_energy / target_energy);

    // --- continuous IFTA on the modulation field ---
    Grid image = target_field;
    for (auto& z : image.data) z *= base_gain;
    Grid modulation(n, n);
    IftaResult result;

    for (int it = 0; it < iterations; ++it) {
        Grid back = propagate_inverse(image, opts.mode);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                Complex illum = pupil_ideal.at(r, c);  // amplitude and aberration
                Complex m = std::abs(illum) > 1e-9 ? back.at(r, c) / illum : Complex(0, 0);
                double mag = std::abs(m);
                if (mag > 1.0) m /= mag;
                modulation.at(r, c) = m;
                back.at(r, c) = m * illum;
            }
        Grid forward = propagate(back, opts.mode);
        double err = 0, norm = 0;
        for (int r = cy - win_px; r <= cy + win_px; ++r)
            for (int c = cx_mod - win_px; c <= cx_mod + win_px; ++c) {
                if (!window_mod.contains(r, c)) continue;
                double want = base_gain * std::abs(target_field.at(r, c));
                double got = std::abs(forward.at(r, c));
                err += (want - got) * (want - got);
                norm += want * want;
            }
        result.window_error.push_back(std::sqrt(err / std::max(norm, 1e-300)));
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                if (window_mod.contains(r, c)) {
                    double want = base_gain * std::abs(target_field.at(r, c));
                    Complex got = forward.at(r, c);
                    double mag = std::abs(got);
                    image.at(r, c) = mag > 1e-300 ? got / mag * want : Complex(want, 0);
                } else {
                    image.at(r, c) = forward.at(r, c);
                }
            }
    }

    // --- binarization: amplitude carrier + serpentine error diffusion ---
    // Ideal transmission 1/2 + (scale/2) Re(m e^{i 2 pi c/T}) carries the
    // encoded field at scale*m/4 in the +1 order; with scale = 4/pi the
    // extremes clip and the cell approaches the full square grating, which is
    // where the extra first-order power comes from. Diffusing the quantization
    // error keeps the noise away from the relayed order.
    auto binarize = [&](const Grid& mod) {
        BinaryHologram holo;
        holo.rows = n;
        holo.cols = n;
        holo.carrier_period = opts.carrier_period;
        holo.on.assign(size_t(n) * size_t(n), 0);
        std::vector<double> err_cur(size_t(n) + 2, 0.0), err_next(size_t(n) + 2, 0.0);
        for (int r = 0; r < n; ++r) {
            std::fill(err_next.begin(), err_next.end(), 0.0);
            bool reverse = (r % 2) == 1;
            for (int k = 0; k < n; ++k) {
                int c = reverse ? n - 1 - k : k;
                Complex m = mod.at(r, c);
                double ideal = 0.5 + 0.5 * target.scale *
                                         (m * std::exp(Complex(0, kTwoPi * double(c) /
                                                                      opts.carrier_period)))
                                             .real();
                double want = ideal + err_cur[size_t(c) + 1];
                int bit = want >= 0.5 ? 1 : 0;
                holo.at(r, c) = std::uint8_t(bit);
                double e = want - bit;
                int step = reverse ? -1 : 1;
                err_cur[size_t(c + step) + 1] += e * 7.0 / 16;
                err_next[size_t(c - step) + 1] += e * 3.0 / 16;
                err_next[size_t(c) + 1] += e * 5.0 / 16;
                err_next[size_t(c + step) + 1] += e * 1.0 / 16;
            }
            std::swap(err_cur, err_next);
        }
        return holo;
    };

    // norm of the target mode for the matched-filter signal power
    double target_norm = 0;
    for (const auto& z : target_field.data) target_norm += std::norm(z);

    auto evaluate = [&](const BinaryHologram& holo) {
        Grid img = propagate_hologram(holo, pupil, true, opts.mode);
        double peak = std::norm(img.at(cy, cx_phys));
        double axis = std::norm(img.at(cy, axis_phys));
        // power carried by the target mode (pedestal and ringing project out)
        Complex overlap = 0;
        for (int r = cy - win_px; r <= cy + win_px; ++r)
            for (int c = cx_phys - win_px; c <= cx_phys + win_px; ++c)
                if (window_phys.contains(r, c))
                    overlap += img.at(r, c) * std::conj(target_field.at(r, c - carrier_px));
        double power = std::norm(overlap) / target_norm;
        return std::tuple<double, double, Grid>(axis / std::max(peak, 1e-300), power,
                                                std::move(img));
    };

    // --- binary-aware refinement: project the relayed image onto the target
    // inside the physical window, demodulate, re-encode ---
    const double phys_gain = base_gain * target.scale / 4.0;
    BinaryHologram best = binarize(modulation);
    auto [best_xt, best_power, best_img] = evaluate(best);

    // Input-output style correction: back-propagate the in-window field error
    // of the achieved binary image and add it to the modulation. Unlike a pure
    // projection this also cancels the multiplicative bias of the encoder.
    Grid mod = modulation;
    Grid cur_img = best_img;
    for (int it = 0; it < opts.binary_refinements; ++it) {
        Grid diff(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                if (!window_phys.contains(r, c)) continue;
                double want = phys_gain * std::abs(target_field.at(r, c - carrier_px));
                Complex got = cur_img.at(r, c);
                double mag = std::abs(got);
                Complex aim = mag > 1e-300 ? got / mag * want : Complex(want, 0);
                diff.at(r, c) = aim - got;
            }
        Grid back = propagate_inverse(diff, opts.mode);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                Complex illum = pupil_ideal.at(r, c);
                if (std::abs(illum) <= 1e-9) continue;
                Complex demod = std::exp(Complex(0, -kTwoPi * double(c) / opts.carrier_period));
                Complex m = mod.at(r, c) + opts.refinement_damping * back.at(r, c) * demod /
                                               (illum * target.scale / 4.0);
                double mag = std::abs(m);
                if (mag > 1.0) m /= mag;
                mod.at(r, c) = m;
            }
        BinaryHologram trial = binarize(mod);
        auto [xt, power, img2] = evaluate(trial);
        cur_img = img2;
        result.refine_crosstalk.push_back(xt);
        if (xt < best_xt) {
            best = std::move(trial);
            best_xt = xt;
            best_power = power;
        }
    }

    result.hologram = std::move(best);
    result.crosstalk = best_xt;
    result.signal_power = best_power;
    return result;
}

Grid propagate_hologram(const BinaryHologram& holo, const PupilField& pupil, bool order_filter,
                        ExecMode mode) {
    const int n = holo.rows;
    if (n != pupil.size()) throw std::invalid_argument("hologram/pupil size mismatch");
    Grid g(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            g.at(r, c) = holo.at(r, c)
                             ? pupil.amplitude.at(r, c) * std::exp(Complex(0, pupil.phase.at(r, c)))
                             : Complex(0, 0);
    Grid img = propagate(g, mode);
    if (order_filter) {
        const int carrier_px = n / holo.carrier_period;
        const int fx = n / 2 + carrier_px, fy = n / 2;
        const double radius = carrier_px / 2.0;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                double dr = r - fy, dc = c - fx;
                if (dr * dr + dc * dc > radius * radius) img.at(r, c) = 0;
            }
    }
    return img;
}

double square_wave_fundamental(int k) {
    if (k <= 0) throw std::domain_error("square_wave_fundamental: k must be positive");
    if (k % 2 == 0) return 0.0;
    return 4.0 / (kPi * k);
}

PhaseSensingResult simulate_phase_sensing(const PupilField& pupil, const PupilPatch& patch_a,
                                          const PupilPatch& patch_b,
                                          const std::vector<double>& phase_grid,
                                          const PhaseSensingOptions& opts) {
    pupil.validate();
    if (phase_grid.size() < 4)
        throw std::invalid_argument("phase sensing: need at least 4 phase steps");
    double dx = patch_a.center_x - patch_b.center_x;
    double dy = patch_a.center_y - patch_b.center_y;
    double min_sep = patch_a.radius + patch_b.radius;
    if (dx * dx + dy * dy < min_sep * min_sep)
        throw std::invalid_argument("phase sensing: patches must be disjoint");

    const int n = pupil.size();
    const double r_na_px = pupil.focal_length * pupil.na / pupil.pitch();

    auto patch_field = [&](const PupilPatch& patch) {
        Complex acc = 0;
        int m = opts.grid_oversampling;
        for (int iy = 0; iy < m; ++iy)
            for (int ix = 0; ix < m; ++ix) {
                double ux = patch.center_x + patch.radius * (2.0 * (ix + 0.5) / m - 1.0);
                double uy = patch.center_y + patch.radius * (2.0 * (iy + 0.5) / m - 1.0);
                double ddx = ux - patch.center_x, ddy = uy - patch.center_y;
                if (ddx * ddx + ddy * ddy > patch.radius * patch.radius) continue;
                int c = int(std::lround(n / 2 + ux * r_na_px));
                int r = int(std::lround(n / 2 + uy * r_na_px));
                if (r < 0 || r >= n || c < 0 || c >= n) continue;
                acc += pupil.amplitude.at(r, c) * std::exp(Complex(0, pupil.phase.at(r, c)));
            }
        return acc;
    };

    Complex ea = patch_field(patch_a);
    Complex eb = patch_field(patch_b);
    double e_scale = std::max(std::abs(ea), std::abs(eb));
    if (std::abs(ea) < 1e-9 * e_scale || std::abs(eb) < 1e-9 * e_scale || e_scale == 0.0)
        throw std::runtime_error("phase sensing: zero-amplitude patch gives no fringe");

    // fluorescence after a fixed optical-pumping exposure: exp(-k I(delta))
    double i_mid = std::norm(ea) + std::norm(eb);
    double k_pump = opts.fixed_k > 0 ? opts.fixed_k : opts.pumping_depth / i_mid;
    std::vector<double> signal(phase_grid.size());
    for (size_t i = 0; i < phase_grid.size(); ++i) {
        Complex e = ea + eb * std::exp(Complex(0, phase_grid[i]));
        signal[i] = std::exp(-k_pump * std::norm(e));
    }

    // linear least squares on a + b cos(delta) + c sin(delta)
    double s_1 = 0, s_c = 0, s_s = 0, s_cc = 0, s_ss = 0, s_cs = 0;
    double y_1 = 0, y_c = 0, y_s = 0;
    for (size_t i = 0; i < phase_grid.size(); ++i) {
        double cd = std::cos(phase_grid[i]), sd = std::sin(phase_grid[i]);
        s_1 += 1;
        s_c += cd;
        s_s += sd;
        s_cc += cd * cd;
        s_ss += sd * sd;
        s_cs += cd * sd;
        y_1 += signal[i];
        y_c += signal[i] * cd;
        y_s += signal[i] * sd;
    }
    Eigen::Matrix3d mat;
    mat << s_1, s_c, s_s, s_c, s_cc, s_cs, s_s, s_cs, s_ss;
    Eigen::Vector3d rhs(y_1, y_c, y_s);
    Eigen::Vector3d coef = mat.ldlt().solve(rhs);

    // fluorescence is minimal where the pumping intensity peaks:
    // I(delta) ~ cos(delta + phi_b - phi_a), so the fitted fundamental is
    // -cos(delta + dphi) and dphi = atan2(c, -b) recovers phi_b - phi_a.
    double dphi = std::atan2(coef(2), -coef(1));
    double amp = std::hypot(coef(1), coef(2));
    if (amp < 1e-9 * std::abs(coef(0)))
        throw std::runtime_error("phase sensing: no fringe observed");
    return {dphi, amp, k_pump};
}

analysis::FitResult fit_pupil_amplitude(const std::vector<IntensitySample>& samples) {
    if (samples.size() < 6)
        throw std::invalid_argument("fit_pupil_amplitude: need >= 6 samples");
    std::vector<analysis::Gauss2dSample> pts;
    pts.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.intensity < 0)
            throw std::invalid_argument("fit_pupil_amplitude: negative intensity");
        pts.push_back({s.x, s.y, std::sqrt(s.intensity)});
    }
    return analysis::fit_gaussian_2d(pts);
}

void remove_tilt_piston(RealGrid& phase) {
    // least-squares plane a + b x + c y over the grid
    double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0, sz = 0, sxz = 0, syz = 0;
    for (int r = 0; r < phase.rows; ++r)
        for (int c = 0; c < phase.cols; ++c) {
            double x = c, y = r, z = phase.at(r, c);
            n += 1;
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
            sz += z;
            sxz += x * z;
            syz += y * z;
        }
    Eigen::Matrix3d mat;
    mat << n, sx, sy, sx, sxx, sxy, sy, sxy, syy;
    Eigen::Vector3d rhs(sz, sxz, syz);
    Eigen::Vector3d plane = mat.ldlt().solve(rhs);
    for (int r = 0; r < phase.rows; ++r)
        for (int c = 0; c < phase.cols; ++c)
            phase.at(r, c) -= plane(0) + plane(1) * c + plane(2) * r;
}

}  // namespace aqm::holography
