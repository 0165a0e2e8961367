#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "csv.hpp"
#include "error.hpp"

namespace zinn {

namespace {
constexpr double kDeg = M_PI / 180.0;
}

void PolygonSet::validate() {
    if (rings.empty()) fail(ErrorCode::InvalidPolygon, "polygon '" + id + "' has no rings");
    bounds = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (auto& ring : rings) {
        if (ring.lon.size() != ring.lat.size()) {
            fail(ErrorCode::InvalidPolygon, "polygon '" + id + "' has mismatched coordinates");
        }
        // Drop an explicit closing vertex.
        if (ring.lon.size() > 1 && ring.lon.front() == ring.lon.back() &&
            ring.lat.front() == ring.lat.back()) {
            ring.lon.pop_back();
            ring.lat.pop_back();
        }
        if (ring.lon.size() < 3) {
            fail(ErrorCode::InvalidPolygon, "polygon '" + id + "' has a ring with fewer than 3 vertices");
        }
        for (std::size_t i = 0; i < ring.lon.size(); ++i) {
            if (!std::isfinite(ring.lon[i]) || !std::isfinite(ring.lat[i])) {
                fail(ErrorCode::InvalidPolygon, "polygon '" + id + "' has non-finite coordinates");
            }
            bounds.min_lon = std::min(bounds.min_lon, ring.lon[i]);
            bounds.max_lon = std::max(bounds.max_lon, ring.lon[i]);
            bounds.min_lat = std::min(bounds.min_lat, ring.lat[i]);
            bounds.max_lat = std::max(bounds.max_lat, ring.lat[i]);
        }
    }
}

bool contains_even_odd(const PolygonSet& polygon, double lon, double lat) {
    if (!polygon.bounds.contains(lon, lat)) return false;
    bool inside = false;
    for (const auto& ring : polygon.rings) {
        const std::size_t n = ring.lon.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const double yi = ring.lat[i], yj = ring.lat[j];
            if ((yi > lat) != (yj > lat)) {
                const double xi = ring.lon[i], xj = ring.lon[j];
                const double x_cross = xi + (lat - yi) * (xj - xi) / (yj - yi);
                if (lon < x_cross) inside = !inside;
            }
        }
    }
    return inside;
}

std::vector<PolygonSet> read_polygons(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    const auto c_id = table.require("region_id");
    const auto c_ring = table.require("ring");
    const auto c_lon = table.require("lon");
    const auto c_lat = table.require("lat");

    std::vector<PolygonSet> polygons;
    std::string current_ring;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size()) {
            fail(ErrorCode::SchemaMismatch,
                 path.string() + ": wrong field count on line " + std::to_string(table.lines[r]));
        }
        const auto lon = csv::parse_number(row[c_lon]);
        const auto lat = csv::parse_number(row[c_lat]);
        if (!lon || !lat) {
            fail(ErrorCode::InvalidPolygon,
                 path.string() + ": bad coordinate on line " + std::to_string(table.lines[r]));
        }
        if (polygons.empty() || polygons.back().id != row[c_id]) {
            polygons.push_back(PolygonSet{row[c_id], {}, {}});
            current_ring.clear();
            polygons.back().rings.emplace_back();
            current_ring = row[c_ring];
        } else if (row[c_ring] != current_ring) {
            polygons.back().rings.emplace_back();
            current_ring = row[c_ring];
        }
        polygons.back().rings.back().lon.push_back(*lon);
        polygons.back().rings.back().lat.push_back(*lat);
    }
    for (auto& p : polygons) p.validate();
    return polygons;
}

void write_polygons(const std::filesystem::path& path, const std::vector<PolygonSet>& polygons) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << "region_id,ring,lon,lat\n";
    for (const auto& p : polygons) {
        for (std::size_t r = 0; r < p.rings.size(); ++r) {
            for (std::size_t i = 0; i < p.rings[r].lon.size(); ++i) {
                out << csv::quote(p.id) << ',' << r << ',' << csv::format_number(p.rings[r].lon[i])
                    << ',' << csv::format_number(p.rings[r].lat[i]) << '\n';
            }
        }
    }
}

PolygonIndex::PolygonIndex(const std::vector<PolygonSet>* polygons, double bucket_deg)
    : polygons_(polygons), bucket_(bucket_deg) {
    if (polygons_->empty()) return;
    Bounds all = polygons_->front().bounds;
    for (const auto& p : *polygons_) {
        all.min_lon = std::min(all.min_lon, p.bounds.min_lon);
        all.min_lat = std::min(all.min_lat, p.bounds.min_lat);
        all.max_lon = std::max(all.max_lon, p.bounds.max_lon);
        all.max_lat = std::max(all.max_lat, p.bounds.max_lat);
    }
    lon0_ = all.min_lon;
    lat0_ = all.min_lat;
    nx_ = static_cast<long>(std::floor((all.max_lon - lon0_) / bucket_)) + 1;
    ny_ = static_cast<long>(std::floor((all.max_lat - lat0_) / bucket_)) + 1;
    buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
    for (std::size_t k = 0; k < polygons_->size(); ++k) {
        const auto& b = (*polygons_)[k].bounds;
        const long x0 = static_cast<long>(std::floor((b.min_lon - lon0_) / bucket_));
        const long x1 = static_cast<long>(std::floor((b.max_lon - lon0_) / bucket_));
        const long y0 = static_cast<long>(std::floor((b.min_lat - lat0_) / bucket_));
        const long y1 = static_cast<long>(std::floor((b.max_lat - lat0_) / bucket_));
        for (long y = y0; y <= y1; ++y) {
            for (long x = x0; x <= x1; ++x) buckets_[static_cast<std::size_t>(y * nx_ + x)].push_back(k);
        }
    }
}

long PolygonIndex::locate(double lon, double lat) const {
    if (!polygons_ || buckets_.empty()) return -1;
    const long x = static_cast<long>(std::floor((lon - lon0_) / bucket_));
    const long y = static_cast<long>(std::floor((lat - lat0_) / bucket_));
    if (x < 0 || y < 0 || x >= nx_ || y >= ny_) return -1;
    for (std::size_t k : buckets_[static_cast<std::size_t>(y * nx_ + x)]) {
        if (contains_even_odd((*polygons_)[k], lon, lat)) return static_cast<long>(k);
    }
    return -1;
}

LocalProjection::LocalProjection(GeoPoint c)
    : center(c), sin_lat0_(std::sin(c.lat * kDeg)), cos_lat0_(std::cos(c.lat * kDeg)) {}

void LocalProjection::forward(double lat, double lon, double& x, double& y) const {
    const double phi = lat * kDeg;
    const double dlam = (lon - center.lon) * kDeg;
    const double sin_phi = std::sin(phi), cos_phi = std::cos(phi);
    // Haversine angular distance stays accurate at small separations.
    const double a = std::pow(std::sin((phi - center.lat * kDeg) / 2.0), 2) +
                     cos_lat0_ * cos_phi * std::pow(std::sin(dlam / 2.0), 2);
    const double c = 2.0 * std::asin(std::min(1.0, std::sqrt(a)));
    const double k = c < 1e-12 ? 1.0 : c / std::sin(c);
    x = kEarthRadiusM * k * cos_phi * std::sin(dlam);
    y = kEarthRadiusM * k * (cos_lat0_ * sin_phi - sin_lat0_ * cos_phi * std::cos(dlam));
}

GeoPoint LocalProjection::inverse(double x, double y) const {
    const double rho = std::hypot(x, y);
    if (rho < 1e-9) return center;
    const double c = rho / kEarthRadiusM;
    const double sin_c = std::sin(c), cos_c = std::cos(c);
    const double phi = std::asin(cos_c * sin_lat0_ + y * sin_c * cos_lat0_ / rho);
    const double lam = center.lon * kDeg +
                       std::atan2(x * sin_c, rho * cos_lat0_ * cos_c - y * sin_lat0_ * sin_c);
    return {phi / kDeg, lam / kDeg};
}

}  // namespace zinn
