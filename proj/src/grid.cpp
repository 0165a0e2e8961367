#include "grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"

namespace zinn {

std::size_t PredictionGrid::inside_count() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const auto& p) { return p.inside; }));
}

namespace {

std::size_t steps(double lo, double hi, double spacing) {
    // Tolerance absorbs representation error when hi lands on the lattice.
    return static_cast<std::size_t>(std::floor((hi - lo) / spacing + 1e-9)) + 1;
}

}  // namespace

PredictionGrid build_grid(const std::vector<PolygonSet>& boundary, const GridBounds& b) {
    if (!(b.spacing > 0.0) || !(b.east >= b.west) || !(b.north >= b.south)) {
        fail(ErrorCode::InvalidArgument, "grid bounds must be ordered and spacing positive");
    }
    if (boundary.empty()) fail(ErrorCode::InvalidPolygon, "empty boundary");
    auto polygons = boundary;
    for (auto& p : polygons) p.validate();

    PredictionGrid g;
    g.bounds = b;
    g.n_lon = steps(b.west, b.east, b.spacing);
    g.n_lat = steps(b.south, b.north, b.spacing);
    g.points.reserve(g.n_lon * g.n_lat);
    for (std::size_t i = 0; i < g.n_lon; ++i) {
        const double lon = b.west + static_cast<double>(i) * b.spacing;
        for (std::size_t j = 0; j < g.n_lat; ++j) {
            const double lat = b.south + static_cast<double>(j) * b.spacing;
            bool inside = false;
            for (const auto& p : polygons) {
                if (contains_even_odd(p, lon, lat)) {
                    inside = true;
                    break;
                }
            }
            g.points.push_back({lat, lon, inside});
        }
    }
    return g;
}

std::vector<CityPoint> filter_cities(std::vector<CityPoint> cities, double min_population) {
    std::erase_if(cities, [&](const CityPoint& c) { return !(c.population > min_population); });
    return cities;
}

std::vector<CityPoint> city_points(const std::filesystem::path& path, double min_population) {
    const auto t = csv::read(path);
    std::vector<std::size_t> cols;
    for (const char* name : {"name", "lat", "lon", "population"}) {
        const auto c = t.find(name);
        if (!c) fail(ErrorCode::SchemaMismatch, path.string() + ": missing column '" + name + "'");
        cols.push_back(*c);
    }
    std::vector<CityPoint> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (row.size() != t.header.size()) {
            fail(ErrorCode::SchemaMismatch, path.string() + ": wrong field count on line " + std::to_string(t.lines[r]));
        }
        const auto lat = csv::parse_number(row[cols[1]]);
        const auto lon = csv::parse_number(row[cols[2]]);
        const auto pop = csv::parse_number(row[cols[3]]);
        if (!lat || !lon || !pop) {
            fail(ErrorCode::SchemaMismatch, path.string() + ": bad number on line " + std::to_string(t.lines[r]));
        }
        out.push_back({row[cols[0]], *lat, *lon, *pop});
    }
    return filter_cities(std::move(out), min_population);
}

// ---------------------------------------------------------------------------

std::set<std::string> ScenarioEncoder::storm_variables() const {
    std::set<std::string> out;
    for (const auto& c : columns) {
        if (c.role == Role::Storm || c.role == Role::Mixed || c.role == Role::EventTime) out.insert(c.variable);
    }
    return out;
}

std::vector<double> ScenarioEncoder::encode(NaturalRecord record, const std::set<std::string>& at_mean) const {
    for (const auto& c : columns) {
        if (!at_mean.count(c.variable)) continue;
        if (c.spline) {
            const auto it = natural_means.find(c.variable);
            if (it == natural_means.end()) {
                fail(ErrorCode::RosterMismatch, "no training mean for '" + c.variable + "'");
            }
            record[c.variable] = it->second;
        } else {
            record[c.variable] = 0.0;  // placeholder; the column is zeroed below
        }
    }
    auto out = encode_record(columns, record);
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (at_mean.count(columns[j].variable) && !columns[j].spline) out[j] = 0.0;
    }
    return out;
}

ScenarioSet make_scenarios(std::span<const NamedPoint> points, int year, int month, const ScenarioEncoder& encoder,
                           const LocationContext& context) {
    if (month < 1 || month > 12) fail(ErrorCode::InvalidArgument, "month must be in 1..12");
    const DateTime date{year, month, 15, 0, 0, 0};
    const auto at_mean = encoder.storm_variables();
    ScenarioSet out;
    for (const auto& p : points) {
        auto loc = context.extract(p.location, year);
        if (!loc.missing_reason.empty()) {
            out.failures.push_back({p, loc.missing_reason});
            continue;
        }
        NaturalRecord rec = std::move(loc.values);
        rec["year"] = static_cast<double>(year);
        rec["day_of_year"] = static_cast<double>(date.day_of_year());
        try {
            out.scenarios.push_back({p, date, encoder.encode(std::move(rec), at_mean)});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::RosterMismatch && e.code() != ErrorCode::NegativeInput &&
                e.code() != ErrorCode::DomainViolation) {
                throw;
            }
            out.failures.push_back({p, e.what()});
        }
    }
    return out;
}

std::vector<PointPrediction> predict_points(const ZeroInflatedModel& model, std::span<const ScenarioPoint> scenarios) {
    std::vector<PointPrediction> out;
    out.reserve(scenarios.size());
    for (const auto& s : scenarios) out.push_back({s.point, s.date.year, s.date.month, predict(model, s.features)});
    return out;
}

namespace {

void sort_rows(std::vector<PointPrediction>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(a.point.location.lat, a.point.location.lon, a.month) <
               std::tie(b.point.location.lat, b.point.location.lon, b.month);
    });
}

}  // namespace

void write_predictions_csv(const std::filesystem::path& path, std::vector<PointPrediction> rows) {
    sort_rows(rows);
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << "kind,name,lat,lon,year,month,p_damage,conditional_transformed,conditional_usd,expected_usd,damage_flag\n";
    for (const auto& r : rows) {
        const auto& d = r.prediction;
        out << r.point.kind << ',' << csv::quote(r.point.name) << ',' << csv::format_number(r.point.location.lat) << ','
            << csv::format_number(r.point.location.lon) << ',' << r.year << ',' << r.month << ','
            << csv::format_number(d.p_damage) << ',' << csv::format_number(d.conditional_transformed) << ','
            << csv::format_number(d.conditional_usd) << ',' << csv::format_number(d.expected_usd) << ','
            << (d.damage_flag ? 1 : 0) << '\n';
    }
}

void write_predictions_geojson(const std::filesystem::path& path, std::vector<PointPrediction> rows) {
    sort_rows(rows);
    nlohmann::json features = nlohmann::json::array();
    for (const auto& r : rows) {
        const auto& d = r.prediction;
        features.push_back({
            {"type", "Feature"},
            {"geometry", {{"type", "Point"}, {"coordinates", {r.point.location.lon, r.point.location.lat}}}},
            {"properties",
             {{"kind", r.point.kind},
              {"name", r.point.name},
              {"year", r.year},
              {"month", r.month},
              {"p_damage", d.p_damage},
              {"conditional_usd", d.conditional_usd},
              {"expected_usd", d.expected_usd},
              {"damage_flag", d.damage_flag}}},
        });
    }
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << nlohmann::json{{"type", "FeatureCollection"}, {"features", std::move(features)}}.dump() << '\n';
}

GridRunSummary run_grid(const ZeroInflatedModel& model, const ScenarioEncoder& encoder,
                        const LocationContext& context, const GridRunOptions& o) {
    GridRunSummary summary;
    const auto grid = build_grid(read_polygons(o.boundary), o.bounds);
    summary.grid_points = grid.points.size();
    summary.inside_points = grid.inside_count();

    std::vector<NamedPoint> points;
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const auto& p = grid.points[i];
        if (p.inside) points.push_back({"grid", "g" + std::to_string(i), {p.lat, p.lon}});
    }
    if (o.cities) {
        for (auto& c : city_points(*o.cities)) {
            points.push_back({"city", c.name, {c.lat, c.lon}});
            ++summary.cities;
        }
    }

    const auto dir = o.out_dir / std::to_string(o.year);
    std::filesystem::create_directories(dir);
    for (int month : o.months) {
        const auto set = make_scenarios(points, o.year, month, encoder, context);
        auto rows = predict_points(model, set.scenarios);
        summary.predicted += rows.size();
        summary.failed += set.failures.size();
        write_predictions_csv(dir / (std::to_string(month) + ".csv"), rows);
        write_predictions_geojson(dir / (std::to_string(month) + ".geojson"), std::move(rows));

        std::ofstream f(dir / ("failures-" + std::to_string(month) + ".csv"));
        if (!f) fail(ErrorCode::Io, "cannot write failures file in " + dir.string());
        f << "kind,name,lat,lon,reason\n";
        for (const auto& x : set.failures) {
            f << x.point.kind << ',' << csv::quote(x.point.name) << ',' << csv::format_number(x.point.location.lat)
              << ',' << csv::format_number(x.point.location.lon) << ',' << csv::quote(x.reason) << '\n';
        }
    }
    return summary;
}

}  // namespace zinn
