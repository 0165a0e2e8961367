#include "raster.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <string>

#include "error.hpp"

namespace zinn {

void CategoricalRaster::validate() const {
    if (ncols <= 0 || nrows <= 0 || !(cell_deg > 0.0)) {
        fail(ErrorCode::ShapeMismatch, "raster must have positive dimensions and cell size");
    }
    if (codes.size() != static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows)) {
        fail(ErrorCode::ShapeMismatch, "raster code count does not match ncols * nrows");
    }
}

CategoricalRaster read_ascii_grid(const std::filesystem::path& path, int vintage) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());

    std::map<std::string, double> header;
    std::string key;
    // Six header keys, case-insensitive.
    while (header.size() < 6 && in >> key) {
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        double value = 0.0;
        if (!(in >> value)) fail(ErrorCode::SchemaMismatch, path.string() + ": bad header value for " + key);
        header[key] = value;
    }
    for (const char* required : {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value"}) {
        if (!header.count(required)) {
            fail(ErrorCode::SchemaMismatch, path.string() + ": missing header key " + required);
        }
    }

    CategoricalRaster r;
    r.ncols = static_cast<int>(header["ncols"]);
    r.nrows = static_cast<int>(header["nrows"]);
    r.west = header["xllcorner"];
    r.south = header["yllcorner"];
    r.cell_deg = header["cellsize"];
    r.nodata = static_cast<std::int32_t>(header["nodata_value"]);
    r.vintage = vintage;
    r.codes.reserve(static_cast<std::size_t>(r.ncols) * static_cast<std::size_t>(r.nrows));
    long long code = 0;
    while (in >> code) r.codes.push_back(static_cast<std::int32_t>(code));
    if (!in.eof()) fail(ErrorCode::SchemaMismatch, path.string() + ": non-integer cell value");
    r.validate();
    return r;
}

void write_ascii_grid(const std::filesystem::path& path, const CategoricalRaster& r) {
    r.validate();
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out.precision(17);
    out << "ncols " << r.ncols << "\nnrows " << r.nrows << "\nxllcorner " << r.west
        << "\nyllcorner " << r.south << "\ncellsize " << r.cell_deg << "\nNODATA_value " << r.nodata
        << '\n';
    for (int row = 0; row < r.nrows; ++row) {
        for (int col = 0; col < r.ncols; ++col) {
            if (col) out << ' ';
            out << r.at(row, col);
        }
        out << '\n';
    }
}

int land_cover_vintage(int year) {
    if (year < 2006) return 2001;
    if (year < 2011) return 2006;
    return 2011;
}

}  // namespace zinn
