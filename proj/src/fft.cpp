#include "aqm/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace aqm::fft {

double Grid::energy() const {
    double e = 0;
    for (const auto& z : data) e += std::norm(z);
    return e;
}

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<Complex> twiddle_table(int n, bool inverse) {
    std::vector<Complex> w(size_t(n) / 2);
    double sign = inverse ? 1.0 : -1.0;
    for (int k = 0; k < n / 2; ++k) {
        double a = sign * 2.0 * M_PI * k / n;
        w[size_t(k)] = {std::cos(a), std::sin(a)};
    }
    return w;
}

void fft_1d(Complex* x, int n, const std::vector<Complex>& w) {
    // bit reversal
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        int step = n / len;
        for (int i = 0; i < n; i += len) {
            for (int k = 0; k < len / 2; ++k) {
                Complex u = x[i + k];
                Complex v = x[i + k + len / 2] * w[size_t(k) * size_t(step)];
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
            }
        }
    }
}

}  // namespace

void fft_rows(Grid& g, bool inverse, ExecMode mode) {
    if (!is_pow2(g.cols)) throw std::invalid_argument("fft: row length must be a power of two");
    const auto w = twiddle_table(g.cols, inverse);
    const double scale = 1.0 / std::sqrt(double(g.cols));
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (int r = 0; r < g.rows; ++r) {
            Complex* row = &g.data[size_t(r) * size_t(g.cols)];
            fft_1d(row, g.cols, w);
            for (int c = 0; c < g.cols; ++c) row[c] *= scale;
        }
    } else {
        for (int r = 0; r < g.rows; ++r) {
            Complex* row = &g.data[size_t(r) * size_t(g.cols)];
            fft_1d(row, g.cols, w);
            for (int c = 0; c < g.cols; ++c) row[c] *= scale;
        }
    }
}

Grid transpose(const Grid& g, ExecMode mode) {
    Grid out(g.cols, g.rows);
    constexpr int kBlock = 32;
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (int rb = 0; rb < g.rows; rb += kBlock)
            for (int cb = 0; cb < g.cols; cb += kBlock)
                for (int r = rb; r < std::min(rb + kBlock, g.rows); ++r)
                    for (int c = cb; c < std::min(cb + kBlock, g.cols); ++c)
                        out.at(c, r) = g.at(r, c);
    } else {
        for (int rb = 0; rb < g.rows; rb += kBlock)
            for (int cb = 0; cb < g.cols; cb += kBlock)
                for (int r = rb; r < std::min(rb + kBlock, g.rows); ++r)
                    for (int c = cb; c < std::min(cb + kBlock, g.cols); ++c)
                        out.at(c, r) = g.at(r, c);
    }
    return out;
}

void fft2d(Grid& g, bool inverse, ExecMode mode) {
    if (!is_pow2(g.rows) || !is_pow2(g.cols))
        throw std::invalid_argument("fft2d: grid must be power-of-two sized");
    fft_rows(g, inverse, mode);
    g = transpose(g, mode);
    fft_rows(g, inverse, mode);
    g = transpose(g, mode);
}

void fftshift(Grid& g) {
    if (g.rows % 2 != 0 || g.cols % 2 != 0)
        throw std::invalid_argument("fftshift: even dimensions required");
    const int hr = g.rows / 2, hc = g.cols / 2;
    for (int r = 0; r < hr; ++r)
        for (int c = 0; c < g.cols; ++c)
            std::swap(g.at(r, c), g.at((r + hr) % g.rows, (c + hc) % g.cols));
}

}  // namespace aqm::fft
