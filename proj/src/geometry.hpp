#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace zinn {

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

struct Bounds {
    double min_lon, min_lat, max_lon, max_lat;

    bool contains(double lon, double lat) const {
        return lon >= min_lon && lon <= max_lon && lat >= min_lat && lat <= max_lat;
    }
};

// Closed ring of (lon, lat) vertices; the closing edge is implicit.
struct Ring {
    std::vector<double> lon;
    std::vector<double> lat;
};

// A polygon set evaluated with the even-odd rule over all of its rings, so
// holes and multiple parts need no separate bookkeeping.
struct PolygonSet {
    std::string id;
    std::vector<Ring> rings;
    Bounds bounds{};

    // Throws InvalidPolygon for rings with fewer than three vertices or
    // non-finite coordinates; computes bounds.
    void validate();
};

// Even-odd crossing test with half-open edges: an edge counts when exactly
// one endpoint lies strictly above the point's latitude, and the crossing is
// strictly east of the point. Points on an edge or vertex get a fixed,
// reproducible answer (left/bottom boundaries in, right/top out for simple
// rectangles).
bool contains_even_odd(const PolygonSet& polygon, double lon, double lat);

// Text schema: header `region_id,ring,lon,lat`, one vertex per row, rows for
// one ring contiguous. Ring ids are arbitrary labels scoped to the region.
std::vector<PolygonSet> read_polygons(const std::filesystem::path& path);
void write_polygons(const std::filesystem::path& path, const std::vector<PolygonSet>& polygons);

// Uniform bucket index over polygon bounds; the first containing polygon in
// input order wins.
class PolygonIndex {
public:
    PolygonIndex() = default;
    PolygonIndex(const std::vector<PolygonSet>* polygons, double bucket_deg = 1.0);

    // Index into the polygon list, or -1.
    long locate(double lon, double lat) const;

private:
    const std::vector<PolygonSet>* polygons_ = nullptr;
    double bucket_ = 1.0;
    double lon0_ = 0.0, lat0_ = 0.0;
    long nx_ = 0, ny_ = 0;
    std::vector<std::vector<std::size_t>> buckets_;
};

// Spherical azimuthal-equidistant projection about a center point.
constexpr double kEarthRadiusM = 6371000.0;

struct LocalProjection {
    explicit LocalProjection(GeoPoint center);

    // Meters east (x) and north (y) of the center.
    void forward(double lat, double lon, double& x, double& y) const;
    GeoPoint inverse(double x, double y) const;

    GeoPoint center;

private:
    double sin_lat0_, cos_lat0_;
};

}  // namespace zinn
