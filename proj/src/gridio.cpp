#include "aqm/gridio.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace aqm::gridio {

namespace {
constexpr char kMagic[8] = {'A', 'Q', 'M', 'G', 'R', 'I', 'D', '1'};
}

void write_real_grid(const std::string& path, const holography::RealGrid& grid,
                     const std::string& kind) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out.write(kMagic, 8);
    std::uint32_t rows = std::uint32_t(grid.rows), cols = std::uint32_t(grid.cols);
    out.write(reinterpret_cast<const char*>(&rows), 4);
    out.write(reinterpret_cast<const char*>(&cols), 4);
    out.write(reinterpret_cast<const char*>(&grid.pitch), 8);
    out.write(reinterpret_cast<const char*>(&grid.wavelength), 8);
    out.write(reinterpret_cast<const char*>(grid.data.data()),
              std::streamsize(grid.data.size() * 8));
    if (!out) throw std::runtime_error("write failed: " + path);

    nlohmann::json meta = {
        {"rows", grid.rows},          {"cols", grid.cols},
        {"pitch_m", grid.pitch},      {"wavelength_m", grid.wavelength},
        {"kind", kind},               {"format", "AQMGRID1 row-major float64"},
    };
    std::ofstream side(path + ".json");
    side << meta.dump(2) << "\n";
}

holography::RealGrid read_real_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not an AQMGRID1 file: " + path);
    std::uint32_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    holography::RealGrid grid{int(rows), int(cols)};
    in.read(reinterpret_cast<char*>(&grid.pitch), 8);
    in.read(reinterpret_cast<char*>(&grid.wavelength), 8);
    in.read(reinterpret_cast<char*>(grid.data.data()), std::streamsize(grid.data.size() * 8));
    if (!in) throw std::runtime_error("truncated grid file: " + path);
    return grid;
}

void write_pbm(const std::string& path, const holography::BinaryHologram& holo) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "P1\n" << holo.cols << " " << holo.rows << "\n";
    for (int r = 0; r < holo.rows; ++r) {
        for (int c = 0; c < holo.cols; ++c) {
            out << (holo.at(r, c) ? '1' : '0');
            out << (c % 64 == 63 || c + 1 == holo.cols ? '\n' : ' ');
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

holography::BinaryHologram read_pbm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P1") throw std::runtime_error("not a P1 PBM: " + path);
    int cols = 0, rows = 0;
    in >> cols >> rows;
    holography::BinaryHologram holo;
    holo.rows = rows;
    holo.cols = cols;
    holo.on.assign(size_t(rows) * size_t(cols), 0);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            int bit = 0;
            in >> bit;
            holo.at(r, c) = std::uint8_t(bit != 0);
        }
    if (!in) throw std::runtime_error("truncated PBM: " + path);
    return holo;
}

}  // namespace aqm::gridio
