#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "geometry.hpp"
#include "model.hpp"

namespace zinn {

struct GridBounds {
    double west = -125.0;
    double east = -66.0;
    double south = 23.0;
    double north = 50.0;
    double spacing = 0.75;
};

struct GridPoint {
    double lat;
    double lon;
    bool inside;
};

struct PredictionGrid {
    GridBounds bounds;
    std::size_t n_lon = 0;
    std::size_t n_lat = 0;
    std::vector<GridPoint> points;  // lon outer, lat inner

    std::size_t inside_count() const;
};

// Enumerates west + i * spacing, south + j * spacing over the closed
// rectangle and flags points inside the boundary (even-odd rule).
PredictionGrid build_grid(const std::vector<PolygonSet>& boundary, const GridBounds& bounds = {});

struct CityPoint {
    std::string name;
    double lat;
    double lon;
    double population;
};

// Header name,lat,lon,population; keeps population > min_population in input order.
std::vector<CityPoint> city_points(const std::filesystem::path& path, double min_population = 100000.0);
std::vector<CityPoint> filter_cities(std::vector<CityPoint> cities, double min_population = 100000.0);

// Encodes natural records for inference. Variables in `at_mean` are set to
// their training mean: 0 on the transformed scale, or for spline variables
// the basis evaluated at the natural-scale mean.
struct ScenarioEncoder {
    std::vector<ColumnDescriptor> columns;
    std::map<std::string, double> natural_means;

    std::vector<double> encode(NaturalRecord record, const std::set<std::string>& at_mean) const;
    // Variables whose role is Storm, Mixed or EventTime.
    std::set<std::string> storm_variables() const;
};

struct NamedPoint {
    std::string kind;  // "grid" or "city"
    std::string name;
    GeoPoint location;
};

struct ScenarioPoint {
    NamedPoint point;
    DateTime date;
    std::vector<double> features;
};

struct ScenarioFailure {
    NamedPoint point;
    std::string reason;
};

struct ScenarioSet {
    std::vector<ScenarioPoint> scenarios;
    std::vector<ScenarioFailure> failures;
};

// The 15th of the month; location features from the context, date features
// from the date, storm characteristics at the training mean.
ScenarioSet make_scenarios(std::span<const NamedPoint> points, int year, int month, const ScenarioEncoder& encoder,
                           const LocationContext& context);

struct PointPrediction {
    NamedPoint point;
    int year;
    int month;
    DamagePrediction prediction;
};

std::vector<PointPrediction> predict_points(const ZeroInflatedModel& model, std::span<const ScenarioPoint> scenarios);

// Sorted by lat, lon.
void write_predictions_csv(const std::filesystem::path& path, std::vector<PointPrediction> rows);
void write_predictions_geojson(const std::filesystem::path& path, std::vector<PointPrediction> rows);

struct GridRunOptions {
    std::filesystem::path boundary;
    std::optional<std::filesystem::path> cities;
    int year = 2019;
    std::vector<int> months{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::filesystem::path out_dir;
    GridBounds bounds;
};

struct GridRunSummary {
    std::size_t grid_points = 0;
    std::size_t inside_points = 0;
    std::size_t cities = 0;
    std::size_t predicted = 0;  // summed over months
    std::size_t failed = 0;
};

// Writes <out>/<year>/<month>.csv, .geojson and failures-<month>.csv.
GridRunSummary run_grid(const ZeroInflatedModel& model, const ScenarioEncoder& encoder,
                        const LocationContext& context, const GridRunOptions& options);

}  // namespace zinn
