#include "extraction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace zinn {

GaussianFootprint gaussian_footprint(GeoPoint center, const CategoricalRaster& raster, double sigma_m,
                                     double half_width_m) {
    if (!(sigma_m > 0.0) || !(half_width_m > 0.0)) {
        fail(ErrorCode::InvalidArgument, "footprint sigma and half width must be positive");
    }
    const LocalProjection proj(center);

    // Geographic extent of the square window, traced along its edges.
    double lat_lo = center.lat, lat_hi = center.lat, lon_lo = center.lon, lon_hi = center.lon;
    constexpr int kEdgeSamples = 16;
    for (int i = 0; i <= kEdgeSamples; ++i) {
        const double t = -half_width_m + 2.0 * half_width_m * i / kEdgeSamples;
        for (auto [x, y] : {std::pair{t, -half_width_m}, std::pair{t, half_width_m},
                            std::pair{-half_width_m, t}, std::pair{half_width_m, t}}) {
            const GeoPoint g = proj.inverse(x, y);
            lat_lo = std::min(lat_lo, g.lat);
            lat_hi = std::max(lat_hi, g.lat);
            lon_lo = std::min(lon_lo, g.lon);
            lon_hi = std::max(lon_hi, g.lon);
        }
    }

    GaussianFootprint fp;
    fp.center = center;
    fp.sigma_m = sigma_m;
    fp.half_width_m = half_width_m;
    fp.partial_coverage = lat_lo < raster.south || lat_hi > raster.north() || lon_lo < raster.west ||
                          lon_hi > raster.east();

    // Candidate index range with a one-cell margin, clipped to the raster.
    const int col0 = std::max(0, static_cast<int>(std::floor((lon_lo - raster.west) / raster.cell_deg)) - 1);
    const int col1 =
        std::min(raster.ncols - 1, static_cast<int>(std::floor((lon_hi - raster.west) / raster.cell_deg)) + 1);
    const int row0 =
        std::max(0, static_cast<int>(std::floor((raster.north() - lat_hi) / raster.cell_deg)) - 1);
    const int row1 =
        std::min(raster.nrows - 1, static_cast<int>(std::floor((raster.north() - lat_lo) / raster.cell_deg)) + 1);

    const double inv_two_var = 1.0 / (2.0 * sigma_m * sigma_m);
    double total = 0.0;
    for (int row = row0; row <= row1; ++row) {
        const double lat = raster.center_lat(row);
        for (int col = col0; col <= col1; ++col) {
            const double lon = raster.center_lon(col);
            double x = 0.0, y = 0.0;
            proj.forward(lat, lon, x, y);
            if (std::abs(x) > half_width_m || std::abs(y) > half_width_m) continue;
            const double w = std::exp(-(x * x + y * y) * inv_two_var);
            fp.cells.push_back({row, col, lat, lon, w});
            total += w;
        }
    }
    if (fp.cells.empty() || !(total > 0.0)) {
        fail(ErrorCode::OutOfCoverage, "footprint at (" + std::to_string(center.lat) + ", " +
                                           std::to_string(center.lon) + ") covers no raster cells");
    }
    for (auto& c : fp.cells) c.weight /= total;
    return fp;
}

ClassProportions weighted_class_proportions(const CategoricalRaster& raster,
                                            const GaussianFootprint& footprint,
                                            std::span<const int> excluded) {
    ClassProportions out;
    double kept = 0.0;
    for (const auto& cell : footprint.cells) {
        const int code = raster.at(cell.row, cell.col);
        const bool drop = code == raster.nodata ||
                          std::find(excluded.begin(), excluded.end(), code) != excluded.end();
        if (drop) {
            out.dropped[code] += cell.weight;
        } else {
            out.proportions[code] += cell.weight;
            kept += cell.weight;
        }
    }
    if (!(kept > 0.0)) {
        fail(ErrorCode::AllCellsDropped, "footprint contains only excluded land-cover classes");
    }
    for (auto& [code, p] : out.proportions) p /= kept;
    return out;
}

std::vector<RegionMass> region_masses(const PolygonIndex& index, const GaussianFootprint& footprint) {
    std::map<std::size_t, double> mass;
    for (const auto& cell : footprint.cells) {
        const long r = index.locate(cell.lon, cell.lat);
        if (r >= 0) mass[static_cast<std::size_t>(r)] += cell.weight;
    }
    if (mass.empty()) {
        fail(ErrorCode::NoRegionCoverage, "no footprint weight falls inside any region");
    }
    std::vector<RegionMass> out;
    out.reserve(mass.size());
    for (auto [r, m] : mass) out.push_back({r, m});
    return out;
}

std::optional<double> weighted_region_value(std::span<const RegionMass> masses,
                                            std::span<const double> region_values) {
    double num = 0.0, den = 0.0;
    for (const auto& rm : masses) {
        if (rm.region >= region_values.size()) {
            fail(ErrorCode::ShapeMismatch, "region index beyond value table");
        }
        const double v = region_values[rm.region];
        if (rm.mass > 0.0 && std::isnan(v)) return std::nullopt;
        num += v * rm.mass;
        den += rm.mass;
    }
    if (!(den > 0.0)) fail(ErrorCode::NoRegionCoverage, "zero region mass");
    return num / den;
}

}  // namespace zinn
