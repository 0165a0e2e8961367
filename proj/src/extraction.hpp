#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "geometry.hpp"
#include "raster.hpp"

namespace zinn {

constexpr double kDefaultSigmaM = 9054.0;
constexpr double kDefaultHalfWidthM = 27165.0;

struct FootprintCell {
    int row;
    int col;
    double lat;  // cell center
    double lon;
    double weight;
};

// Normalized Gaussian weights over the raster cells whose centers fall in a
// square window (side 2 * half_width_m) around the center, measured in a
// local azimuthal-equidistant frame.
struct GaussianFootprint {
    GeoPoint center;
    double sigma_m = kDefaultSigmaM;
    double half_width_m = kDefaultHalfWidthM;
    std::vector<FootprintCell> cells;
    // The window extends past the raster; weights renormalized over the rest.
    bool partial_coverage = false;
};

// Throws OutOfCoverage when the window covers no cell, InvalidArgument for
// non-positive sigma or width.
GaussianFootprint gaussian_footprint(GeoPoint center, const CategoricalRaster& raster,
                                     double sigma_m = kDefaultSigmaM,
                                     double half_width_m = kDefaultHalfWidthM);

// Unclassified (0) and Perennial Ice/Snow (12).
inline constexpr int kDefaultExcludedClasses[] = {0, 12};

struct ClassProportions {
    std::map<int, double> proportions;  // sums to 1
    std::map<int, double> dropped;      // weight mass removed per code (incl. nodata)
};

// Throws AllCellsDropped when no retained class carries weight.
ClassProportions weighted_class_proportions(const CategoricalRaster& raster,
                                            const GaussianFootprint& footprint,
                                            std::span<const int> excluded = kDefaultExcludedClasses);

struct RegionMass {
    std::size_t region;
    double mass;
};

// Footprint weight per region; cells outside every region are left out.
// Throws NoRegionCoverage when no cell lands in a region.
std::vector<RegionMass> region_masses(const PolygonIndex& index, const GaussianFootprint& footprint);

// Mass-weighted mean of per-region values (indexed like the polygon list).
// NaN marks a missing regional value: any such region carrying mass makes
// the result missing.
std::optional<double> weighted_region_value(std::span<const RegionMass> masses,
                                            std::span<const double> region_values);

}  // namespace zinn
