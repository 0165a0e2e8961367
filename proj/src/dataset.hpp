#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "events.hpp"
#include "extraction.hpp"
#include "features.hpp"
#include "geometry.hpp"
#include "inflation.hpp"
#include "matrix.hpp"
#include "raster.hpp"

namespace zinn {

// Region polygons with per-year tabular values.
struct RegionalData {
    std::vector<PolygonSet> polygons;
    std::vector<std::string> columns;
    // year -> column -> value per polygon (NaN when missing)
    std::map<int, std::vector<std::vector<double>>> values;

    int first_year() const { return values.begin()->first; }
    int last_year() const { return values.rbegin()->first; }
    // Event years are clamped to the available range.
    int matched_year(int year) const;
};

// Values file header: region_id,year,<column>... ; geometry per read_polygons.
RegionalData read_regional(const std::filesystem::path& geometry, const std::filesystem::path& values);

struct LocationFeatures {
    NaturalRecord values;
    std::string missing_reason;  // empty when complete
};

// Everything needed to compute location-derived variables for a point.
class LocationContext {
public:
    LocationContext(std::map<int, CategoricalRaster> land_cover, RegionalData regions, FeatureConfig config,
                    double sigma_m = kDefaultSigmaM, double half_width_m = kDefaultHalfWidthM);
    // The polygon index points into regions_.
    LocationContext(const LocationContext&) = delete;
    LocationContext& operator=(const LocationContext&) = delete;

    // Coordinates, land-cover variables and regional recipe outputs. Coverage
    // failures are reported through missing_reason rather than thrown.
    LocationFeatures extract(GeoPoint point, int year) const;

    const FeatureConfig& config() const { return config_; }
    const RegionalData& regions() const { return regions_; }
    const CategoricalRaster& raster_for_year(int year) const;

private:
    std::map<int, CategoricalRaster> land_cover_;
    RegionalData regions_;
    FeatureConfig config_;
    PolygonIndex index_;
    double sigma_m_;
    double half_width_m_;
};

// Everything assemble_feature_table reads. Loaded from a JSON manifest:
// {"events", "cpi", "land_cover": {"2001": ..., "2006": ..., "2011": ...},
//  "region_geometry", "region_values", optional "config", "roster",
//  "study_window": [first, last], "footprint": {"sigma_m", "half_width_m"}}.
// Relative paths resolve against the manifest's directory.
struct SourceManifest {
    std::filesystem::path events;
    std::filesystem::path cpi;
    std::map<int, std::filesystem::path> land_cover;
    std::filesystem::path region_geometry;
    std::filesystem::path region_values;
    std::optional<std::filesystem::path> config;
    std::optional<std::filesystem::path> roster;
    StudyWindow window;
    double sigma_m = kDefaultSigmaM;
    double half_width_m = kDefaultHalfWidthM;
};

SourceManifest read_manifest(const std::filesystem::path& path);
std::unique_ptr<LocationContext> load_location_context(const SourceManifest& manifest);

// ---------------------------------------------------------------------------

struct ColumnDescriptor {
    std::string name;      // column name; spline columns are "<variable>_bs<k>"
    std::string variable;  // roster variable
    Source source = Source::StormEvents;
    Role role = Role::Storm;
    TransformSpec transform;
    std::optional<SplineBasisSpec> spline;
    int basis_index = -1;
    std::string unit;
};

struct FeatureTable {
    std::vector<std::string> row_ids;
    std::vector<double> lat;
    std::vector<double> lon;
    std::vector<ColumnDescriptor> columns;
    Matrix x;                         // transformed predictors
    std::vector<double> outcome;      // transformed damage
    std::vector<double> outcome_raw;  // inflation-adjusted USD
    TransformSpec outcome_spec;
    std::map<std::string, double> natural_means;  // per roster variable
    std::vector<VariableDescriptor> roster;
    FeatureConfig config;

    std::size_t rows() const { return row_ids.size(); }
    std::optional<std::size_t> column_index(const std::string& name) const;
};

// Fits one transform per column (per basis column for spline variables).
std::vector<ColumnDescriptor> fit_columns(const std::vector<VariableDescriptor>& roster,
                                          const std::vector<NaturalRecord>& records);

// Encodes a natural-scale record; throws RosterMismatch naming every
// variable absent from the record (or missing).
std::vector<double> encode_record(const std::vector<ColumnDescriptor>& columns, const NaturalRecord& record);

struct DropRecord {
    std::string row_id;
    std::string reason;
};

struct AssembleResult {
    FeatureTable table;
    std::vector<DropRecord> dropped;
    std::size_t ingested = 0;
    std::vector<EventReject> rejects;
};

// Per event: land-cover vintage by year, Gaussian-weighted land-cover and
// regional extraction, derived variables, CPI-adjusted outcome. Rows with any
// missing variable are dropped and reported; transforms are fitted on all
// retained rows.
AssembleResult assemble_feature_table(const std::vector<TornadoEvent>& events, const LocationContext& context,
                                      const CpiSeries& cpi, const std::vector<VariableDescriptor>& roster);
AssembleResult assemble_from_manifest(const std::filesystem::path& manifest_path);

void write_drop_report(const std::filesystem::path& path, const std::vector<DropRecord>& dropped);

// CSV (row_id,lat,lon,damage_usd,outcome,<columns>) plus "<path>.meta.json".
void write_table(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_table(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

enum class Partition : std::uint8_t { Train = 0, CrossValidation = 1, Test = 2 };

std::string to_string(Partition p);

struct SplitAssignment {
    std::vector<Partition> assignment;  // per table row
    std::uint64_t seed = 0;

    std::vector<std::size_t> indices(Partition p) const;
    std::array<std::size_t, 3> counts() const;
};

// Seeded shuffle of row indices, then slices [0, round(f0 n)),
// [round(f0 n), round((f0 + f1) n)), rest. Throws BadFractions.
SplitAssignment split(std::size_t n, std::uint64_t seed, std::array<double, 3> fractions = {0.6, 0.2, 0.2});

void write_split(const std::filesystem::path& path, const FeatureTable& table, const SplitAssignment& split);
SplitAssignment read_split(const std::filesystem::path& path, const FeatureTable& table);

// ---------------------------------------------------------------------------

inline constexpr const char* kVariableSetNames[] = {"beforehand", "storm_characteristic", "combined", "no_lc",
                                                     "no_acs"};

// Column indices per named variable set.
std::map<std::string, std::vector<std::size_t>> variable_sets(const FeatureTable& table);
std::vector<std::size_t> variable_set(const FeatureTable& table, const std::string& name);

}  // namespace zinn
