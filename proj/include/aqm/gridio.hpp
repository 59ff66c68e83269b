#pragma once

#include <string>

#include "aqm/holography.hpp"

namespace aqm::gridio {

// Portable float grid: 8-byte magic "AQMGRID1", uint32 rows, uint32 cols,
// float64 pitch (m), float64 wavelength (m), row-major float64 samples.
// A JSON sidecar <path>.json mirrors the header plus a free-text kind.
void write_real_grid(const std::string& path, const holography::RealGrid& grid,
                     const std::string& kind);
holography::RealGrid read_real_grid(const std::string& path);

// Holograms as plain PBM (P1).
void write_pbm(const std::string& path, const holography::BinaryHologram& holo);
holography::BinaryHologram read_pbm(const std::string& path);

}  // namespace aqm::gridio
