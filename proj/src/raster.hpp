#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "geometry.hpp"

namespace zinn {

// Single-band integer grid georeferenced in geographic degrees. Row 0 is the
// northern edge. Loaded from ESRI ASCII grid files (ncols, nrows, xllcorner,
// yllcorner, cellsize, NODATA_value, then rows north to south).
struct CategoricalRaster {
    int ncols = 0;
    int nrows = 0;
    double west = 0.0;    // x origin (lon of the western edge)
    double south = 0.0;   // lat of the southern edge
    double cell_deg = 0.0;
    std::int32_t nodata = -9999;
    int vintage = 0;
    std::vector<std::int32_t> codes;  // nrows * ncols, row-major

    double north() const { return south + cell_deg * nrows; }
    double east() const { return west + cell_deg * ncols; }
    double center_lon(int col) const { return west + (col + 0.5) * cell_deg; }
    double center_lat(int row) const { return north() - (row + 0.5) * cell_deg; }
    std::int32_t at(int row, int col) const {
        return codes[static_cast<std::size_t>(row) * static_cast<std::size_t>(ncols) +
                     static_cast<std::size_t>(col)];
    }

    // Throws ShapeMismatch when the code count disagrees with the shape.
    void validate() const;
};

CategoricalRaster read_ascii_grid(const std::filesystem::path& path, int vintage = 0);
void write_ascii_grid(const std::filesystem::path& path, const CategoricalRaster& raster);

// Land-cover vintage for an event year: < 2006 -> 2001, [2006, 2011) -> 2006,
// otherwise 2011.
int land_cover_vintage(int year);

}  // namespace zinn
