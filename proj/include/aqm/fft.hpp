#pragma once

#include <complex>
#include <vector>

#include "aqm/parallel.hpp"

namespace aqm::fft {

using Complex = std::complex<double>;

// Row-major complex grid.
struct Grid {
    int rows = 0;
    int cols = 0;
    std::vector<Complex> data;

    Grid() = default;
    Grid(int r, int c) : rows(r), cols(c), data(size_t(r) * size_t(c)) {}

    Complex& at(int r, int c) { return data[size_t(r) * size_t(cols) + size_t(c)]; }
    const Complex& at(int r, int c) const { return data[size_t(r) * size_t(cols) + size_t(c)]; }

    double energy() const;
};

// In-place radix-2 FFT of each row (power-of-two length). Unitary scaling
// (1/sqrt(n) per transform) so energy is conserved exactly.
void fft_rows(Grid& g, bool inverse, ExecMode mode);

// Full 2-D unitary transform (rows, transpose, rows, transpose).
void fft2d(Grid& g, bool inverse, ExecMode mode = ExecMode::Parallel);

// Swap quadrants; for the even sizes used here shift and unshift coincide.
void fftshift(Grid& g);

Grid transpose(const Grid& g, ExecMode mode);

}  // namespace aqm::fft
