#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace zinn {

namespace {

using nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int RegionalData::matched_year(int year) const { return std::clamp(year, first_year(), last_year()); }

RegionalData read_regional(const std::filesystem::path& geometry, const std::filesystem::path& values) {
    RegionalData data;
    data.polygons = read_polygons(geometry);
    std::map<std::string, std::size_t> region_index;
    for (std::size_t i = 0; i < data.polygons.size(); ++i) {
        if (!region_index.emplace(data.polygons[i].id, i).second) {
            fail(ErrorCode::InvalidPolygon, geometry.string() + ": region '" + data.polygons[i].id +
                                                "' appears in non-contiguous rows");
        }
    }

    const auto table = csv::read(values);
    const auto c_id = table.require("region_id");
    const auto c_year = table.require("year");
    std::vector<std::size_t> value_cols;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c != c_id && c != c_year) {
            value_cols.push_back(c);
            data.columns.push_back(table.header[c]);
        }
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size()) {
            fail(ErrorCode::SchemaMismatch, values.string() + ": wrong field count on line " +
                                                std::to_string(table.lines[r]));
        }
        const auto year = csv::parse_integer(row[c_year]);
        if (!year) fail(ErrorCode::SchemaMismatch, values.string() + ": bad year on line " + std::to_string(table.lines[r]));
        const auto it = region_index.find(row[c_id]);
        if (it == region_index.end()) continue;  // values for a region without geometry
        auto& slot = data.values[static_cast<int>(*year)];
        if (slot.empty()) slot.assign(value_cols.size(), std::vector<double>(data.polygons.size(), kNaN));
        for (std::size_t k = 0; k < value_cols.size(); ++k) {
            slot[k][it->second] = csv::parse_number(row[value_cols[k]]).value_or(kNaN);
        }
    }
    if (data.values.empty()) fail(ErrorCode::EmptyFile, values.string() + ": no regional values");
    return data;
}

LocationContext::LocationContext(std::map<int, CategoricalRaster> land_cover, RegionalData regions,
                                 FeatureConfig config, double sigma_m, double half_width_m)
    : land_cover_(std::move(land_cover)),
      regions_(std::move(regions)),
      config_(std::move(config)),
      sigma_m_(sigma_m),
      half_width_m_(half_width_m) {
    if (land_cover_.empty()) fail(ErrorCode::InvalidArgument, "no land-cover rasters");
    for (auto& [vintage, raster] : land_cover_) {
        raster.validate();
        raster.vintage = vintage;
    }
    config_.validate_against(regions_.columns);
    index_ = PolygonIndex(&regions_.polygons);
}

const CategoricalRaster& LocationContext::raster_for_year(int year) const {
    const int vintage = land_cover_vintage(year);
    const auto it = land_cover_.find(vintage);
    if (it == land_cover_.end()) {
        fail(ErrorCode::NotFound, "no land-cover raster for vintage " + std::to_string(vintage));
    }
    return it->second;
}

LocationFeatures LocationContext::extract(GeoPoint point, int year) const {
    LocationFeatures out;
    out.values["begin_lat"] = point.lat;
    out.values["begin_lon"] = point.lon;
    const auto& raster = raster_for_year(year);
    try {
        const auto fp = gaussian_footprint(point, raster, sigma_m_, half_width_m_);
        const auto land = weighted_class_proportions(raster, fp, config_.excluded_land_classes);
        out.values.merge(derive_land_features(land.proportions, config_));

        const auto masses = region_masses(index_, fp);
        const int matched = regions_.matched_year(year);
        const auto yr = regions_.values.find(matched);
        if (yr == regions_.values.end()) {
            out.missing_reason = "no regional values for year " + std::to_string(matched);
            return out;
        }
        std::map<std::string, double> raw;
        for (std::size_t k = 0; k < regions_.columns.size(); ++k) {
            raw[regions_.columns[k]] = weighted_region_value(masses, yr->second[k]).value_or(kNaN);
        }
        auto recipes = apply_recipes(raw, config_.recipes);
        for (const auto& [name, v] : recipes) {
            if (std::isnan(v) && out.missing_reason.empty()) out.missing_reason = "missing regional value: " + name;
        }
        out.values.merge(recipes);
    } catch (const Error& e) {
        switch (e.code()) {
            case ErrorCode::OutOfCoverage:
            case ErrorCode::AllCellsDropped:
            case ErrorCode::NoRegionCoverage:
                out.missing_reason = std::string(to_string(e.code())) + ": " + e.what();
                break;
            default: throw;
        }
    }
    return out;
}

SourceManifest read_manifest(const std::filesystem::path& path) {
    SourceManifest m;
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };
    try {
        const json j = json::parse(read_text(path));
        m.events = resolve(j.at("events").get<std::string>());
        m.cpi = resolve(j.at("cpi").get<std::string>());
        for (auto& [k, v] : j.at("land_cover").items()) m.land_cover[std::stoi(k)] = resolve(v.get<std::string>());
        m.region_geometry = resolve(j.at("region_geometry").get<std::string>());
        m.region_values = resolve(j.at("region_values").get<std::string>());
        if (j.contains("config")) m.config = resolve(j.at("config").get<std::string>());
        if (j.contains("roster")) m.roster = resolve(j.at("roster").get<std::string>());
        if (j.contains("study_window")) {
            m.window.first = parse_datetime(j.at("study_window").at(0).get<std::string>());
            m.window.last = parse_datetime(j.at("study_window").at(1).get<std::string>());
            if (m.window.last.hour == 0 && m.window.last.minute == 0 && m.window.last.second == 0) {
                m.window.last.hour = 23;
                m.window.last.minute = 59;
                m.window.last.second = 59;
            }
        }
        if (j.contains("footprint")) {
            m.sigma_m = j.at("footprint").value("sigma_m", kDefaultSigmaM);
            m.half_width_m = j.at("footprint").value("half_width_m", kDefaultHalfWidthM);
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaMismatch, path.string() + ": " + e.what());
    } catch (const std::invalid_argument&) {
        fail(ErrorCode::SchemaMismatch, path.string() + ": land_cover keys must be vintage years");
    }
    return m;
}

std::unique_ptr<LocationContext> load_location_context(const SourceManifest& m) {
    std::map<int, CategoricalRaster> rasters;
    for (const auto& [vintage, p] : m.land_cover) rasters.emplace(vintage, read_ascii_grid(p, vintage));
    auto config = m.config ? read_feature_config(*m.config) : default_feature_config();
    return std::make_unique<LocationContext>(std::move(rasters), read_regional(m.region_geometry, m.region_values),
                                             std::move(config), m.sigma_m, m.half_width_m);
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> FeatureTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) return i;
    }
    return std::nullopt;
}

std::vector<ColumnDescriptor> fit_columns(const std::vector<VariableDescriptor>& roster,
                                          const std::vector<NaturalRecord>& records) {
    std::vector<ColumnDescriptor> columns;
    for (const auto& v : roster) {
        std::vector<double> natural;
        natural.reserve(records.size());
        for (const auto& r : records) natural.push_back(r.at(v.name));
        auto base = ColumnDescriptor{v.name, v.name, v.source, v.role, {}, v.spline, -1, v.unit};
        try {
            if (v.spline) {
                std::vector<std::vector<double>> basis;
                basis.reserve(natural.size());
                for (double x : natural) basis.push_back(bspline_basis(x, *v.spline));
                for (int k = 0; k < v.spline->basis_count(); ++k) {
                    std::vector<double> col;
                    col.reserve(basis.size());
                    for (const auto& b : basis) col.push_back(b[static_cast<std::size_t>(k)]);
                    auto d = base;
                    d.name = v.name + "_bs" + std::to_string(k);
                    d.basis_index = k;
                    d.transform = fit_transform(v.transform, col);
                    columns.push_back(std::move(d));
                }
            } else {
                base.transform = fit_transform(v.transform, natural);
                columns.push_back(std::move(base));
            }
        } catch (const Error& e) {
            throw Error(e.code(), "variable '" + v.name + "': " + e.what());
        }
    }
    return columns;
}

std::vector<double> encode_record(const std::vector<ColumnDescriptor>& columns, const NaturalRecord& record) {
    std::vector<double> out;
    out.reserve(columns.size());
    std::vector<std::string> missing;
    std::string cached_variable;
    std::vector<double> cached_basis;
    for (const auto& c : columns) {
        const auto it = record.find(c.variable);
        if (it == record.end() || std::isnan(it->second)) {
            if (missing.empty() || missing.back() != c.variable) missing.push_back(c.variable);
            out.push_back(kNaN);
            continue;
        }
        if (c.spline) {
            if (cached_variable != c.variable) {
                cached_basis = bspline_basis(it->second, *c.spline);
                cached_variable = c.variable;
            }
            out.push_back(apply_transform(c.transform, cached_basis.at(static_cast<std::size_t>(c.basis_index))));
        } else {
            out.push_back(apply_transform(c.transform, it->second));
        }
    }
    if (!missing.empty()) {
        std::string names;
        for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
        fail(ErrorCode::RosterMismatch, "missing variables: " + names);
    }
    return out;
}

AssembleResult assemble_feature_table(const std::vector<TornadoEvent>& events, const LocationContext& context,
                                      const CpiSeries& cpi, const std::vector<VariableDescriptor>& roster) {
    if (roster.empty()) fail(ErrorCode::InvalidArgument, "empty variable roster");
    AssembleResult result;
    result.ingested = events.size();

    std::vector<NaturalRecord> records;
    std::vector<const TornadoEvent*> kept;
    std::vector<double> damages;
    for (const auto& e : events) {
        auto loc = context.extract({e.begin_lat, e.begin_lon}, e.year());
        if (!loc.missing_reason.empty()) {
            result.dropped.push_back({e.id, loc.missing_reason});
            continue;
        }
        NaturalRecord rec = derive_storm_features(e, context.config());
        rec.merge(loc.values);
        derive_mixed_features(rec);

        std::string reason;
        for (const auto& v : roster) {
            const auto it = rec.find(v.name);
            if (it == rec.end()) {
                fail(ErrorCode::RosterMismatch, "roster variable '" + v.name + "' is not produced by the pipeline");
            }
            if (std::isnan(it->second)) {
                reason = "missing value: " + v.name;
                break;
            }
        }
        double adjusted = 0.0;
        if (reason.empty()) {
            try {
                adjusted = adjust_inflation(e.damage_usd, {e.begin.year, e.begin.month}, cpi);
            } catch (const Error& err) {
                if (err.code() != ErrorCode::MissingCpiMonth) throw;
                reason = err.what();
            }
        }
        if (!reason.empty()) {
            result.dropped.push_back({e.id, reason});
            continue;
        }
        records.push_back(std::move(rec));
        kept.push_back(&e);
        damages.push_back(adjusted);
    }

    auto& t = result.table;
    t.roster = roster;
    t.config = context.config();
    if (records.size() < 2) {
        fail(ErrorCode::DegenerateColumn, "fewer than two complete rows after dropping missing values");
    }
    t.columns = fit_columns(roster, records);
    t.outcome_spec = fit_transform(TransformKind::Log1pStandardize, damages);
    for (const auto& v : roster) {
        double s = 0.0;
        for (const auto& r : records) s += r.at(v.name);
        t.natural_means[v.name] = s / static_cast<double>(records.size());
    }
    t.x = Matrix(0, t.columns.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        t.row_ids.push_back(kept[i]->id);
        t.lat.push_back(kept[i]->begin_lat);
        t.lon.push_back(kept[i]->begin_lon);
        t.x.append_row(encode_record(t.columns, records[i]));
        t.outcome_raw.push_back(damages[i]);
        t.outcome.push_back(apply_transform(t.outcome_spec, damages[i]));
    }
    return result;
}

AssembleResult assemble_from_manifest(const std::filesystem::path& manifest_path) {
    const auto m = read_manifest(manifest_path);
    auto ingest = ingest_events(m.events, m.window);
    const auto cpi = read_cpi(m.cpi);
    const auto context = load_location_context(m);
    const auto roster = m.roster ? roster_from_json(read_text(*m.roster)) : default_roster();
    auto result = assemble_feature_table(ingest.events, *context, cpi, roster);
    result.rejects = std::move(ingest.rejects);
    return result;
}

void write_drop_report(const std::filesystem::path& path, const std::vector<DropRecord>& dropped) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << "row_id,reason\n";
    for (const auto& d : dropped) out << csv::quote(d.row_id) << ',' << csv::quote(d.reason) << '\n';
}

// ---------------------------------------------------------------------------
// Table persistence

namespace {

json transform_json(const TransformSpec& s) {
    return {{"kind", std::string(to_string(s.kind))}, {"mean", s.mean}, {"sd", s.sd}};
}

TransformSpec transform_from_json(const json& j) {
    return {transform_kind_from_string(j.at("kind").get<std::string>()), j.at("mean").get<double>(),
            j.at("sd").get<double>()};
}

}  // namespace

void write_table(const std::filesystem::path& path, const FeatureTable& t) {
    {
        std::ofstream out(path);
        if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
        out << "row_id,lat,lon,damage_usd,outcome";
        for (const auto& c : t.columns) out << ',' << csv::quote(c.name);
        out << '\n';
        for (std::size_t r = 0; r < t.rows(); ++r) {
            out << csv::quote(t.row_ids[r]) << ',' << csv::format_number(t.lat[r]) << ','
                << csv::format_number(t.lon[r]) << ',' << csv::format_number(t.outcome_raw[r]) << ','
                << csv::format_number(t.outcome[r]);
            for (double v : t.x.row(r)) out << ',' << csv::format_number(v);
            out << '\n';
        }
    }
    json meta;
    meta["outcome_transform"] = transform_json(t.outcome_spec);
    meta["columns"] = json::array();
    for (const auto& c : t.columns) {
        json o{{"name", c.name},         {"variable", c.variable}, {"source", to_string(c.source)},
               {"role", to_string(c.role)}, {"transform", transform_json(c.transform)}, {"unit", c.unit}};
        if (c.spline) {
            o["spline"] = {{"degree", c.spline->degree},
                           {"interior_knots", c.spline->interior_knots},
                           {"lo", c.spline->lo},
                           {"hi", c.spline->hi},
                           {"basis_index", c.basis_index}};
        }
        meta["columns"].push_back(std::move(o));
    }
    meta["natural_means"] = t.natural_means;
    meta["roster"] = json::parse(roster_to_json(t.roster));
    meta["feature_config"] = json::parse(feature_config_to_json(t.config));
    std::ofstream out(path.string() + ".meta.json");
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string() + ".meta.json");
    out << meta.dump(2) << '\n';
}

FeatureTable read_table(const std::filesystem::path& path) {
    FeatureTable t;
    try {
        const json meta = json::parse(read_text(path.string() + ".meta.json"));
        t.outcome_spec = transform_from_json(meta.at("outcome_transform"));
        for (const auto& o : meta.at("columns")) {
            ColumnDescriptor c;
            c.name = o.at("name").get<std::string>();
            c.variable = o.at("variable").get<std::string>();
            c.source = source_from_string(o.at("source").get<std::string>());
            c.role = role_from_string(o.at("role").get<std::string>());
            c.transform = transform_from_json(o.at("transform"));
            c.unit = o.value("unit", "");
            if (o.contains("spline")) {
                const auto& s = o.at("spline");
                c.spline = SplineBasisSpec{s.at("degree").get<int>(), s.at("interior_knots").get<int>(),
                                           s.at("lo").get<double>(), s.at("hi").get<double>()};
                c.basis_index = s.at("basis_index").get<int>();
            }
            t.columns.push_back(std::move(c));
        }
        t.natural_means = meta.at("natural_means").get<std::map<std::string, double>>();
        t.roster = roster_from_json(meta.at("roster").dump());
        t.config = feature_config_from_json(meta.at("feature_config").dump());
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaMismatch, path.string() + ".meta.json: " + e.what());
    }

    const auto table = csv::read(path);
    const std::vector<std::string> fixed = {"row_id", "lat", "lon", "damage_usd", "outcome"};
    if (table.header.size() != fixed.size() + t.columns.size() ||
        !std::equal(fixed.begin(), fixed.end(), table.header.begin())) {
        fail(ErrorCode::SchemaMismatch, path.string() + ": header does not match metadata");
    }
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (table.header[fixed.size() + c] != t.columns[c].name) {
            fail(ErrorCode::SchemaMismatch, path.string() + ": column '" + table.header[fixed.size() + c] +
                                                "' does not match metadata");
        }
    }
    t.x = Matrix(0, t.columns.size());
    std::vector<double> row_values(t.columns.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        auto num = [&](std::size_t c) {
            const auto v = c < row.size() ? csv::parse_number(row[c]) : std::nullopt;
            if (!v) fail(ErrorCode::SchemaMismatch, path.string() + ": bad number on line " + std::to_string(table.lines[r]));
            return *v;
        };
        if (row.size() != table.header.size()) {
            fail(ErrorCode::SchemaMismatch, path.string() + ": wrong field count on line " + std::to_string(table.lines[r]));
        }
        t.row_ids.push_back(row[0]);
        t.lat.push_back(num(1));
        t.lon.push_back(num(2));
        t.outcome_raw.push_back(num(3));
        t.outcome.push_back(num(4));
        for (std::size_t c = 0; c < t.columns.size(); ++c) row_values[c] = num(fixed.size() + c);
        t.x.append_row(row_values);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Split

std::string to_string(Partition p) {
    switch (p) {
        case Partition::Train: return "train";
        case Partition::CrossValidation: return "cv";
        case Partition::Test: return "test";
    }
    return "train";
}

std::vector<std::size_t> SplitAssignment::indices(Partition p) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == p) out.push_back(i);
    }
    return out;
}

std::array<std::size_t, 3> SplitAssignment::counts() const {
    std::array<std::size_t, 3> c{0, 0, 0};
    for (auto p : assignment) ++c[static_cast<std::size_t>(p)];
    return c;
}

SplitAssignment split(std::size_t n, std::uint64_t seed, std::array<double, 3> f) {
    const double total = f[0] + f[1] + f[2];
    if (!(f[0] > 0.0 && f[1] > 0.0 && f[2] > 0.0) || std::abs(total - 1.0) > 1e-9) {
        fail(ErrorCode::BadFractions, "split fractions must be positive and sum to 1");
    }
    auto order = iota_indices(n);
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    const auto nd = static_cast<double>(n);
    const auto b1 = static_cast<std::size_t>(std::llround(f[0] * nd));
    const auto b2 = std::max(b1, static_cast<std::size_t>(std::llround((f[0] + f[1]) * nd)));

    SplitAssignment s;
    s.seed = seed;
    s.assignment.assign(n, Partition::Train);
    for (std::size_t k = b1; k < n; ++k) {
        s.assignment[order[k]] = k < b2 ? Partition::CrossValidation : Partition::Test;
    }
    return s;
}

void write_split(const std::filesystem::path& path, const FeatureTable& table, const SplitAssignment& s) {
    if (s.assignment.size() != table.rows()) fail(ErrorCode::ShapeMismatch, "split does not match table rows");
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << "# seed " << s.seed << "\nrow_id,set\n";
    for (std::size_t i = 0; i < table.rows(); ++i) {
        out << csv::quote(table.row_ids[i]) << ',' << to_string(s.assignment[i]) << '\n';
    }
}

SplitAssignment read_split(const std::filesystem::path& path, const FeatureTable& table) {
    SplitAssignment s;
    {
        std::ifstream in(path);
        std::string first;
        std::getline(in, first);
        if (first.rfind("# seed ", 0) == 0) s.seed = std::stoull(first.substr(7));
    }
    const auto t = csv::read(path);
    const auto c_id = t.require("row_id");
    const auto c_set = t.require("set");
    if (t.rows.size() != table.rows()) fail(ErrorCode::ShapeMismatch, path.string() + ": row count differs from table");
    s.assignment.resize(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.rows[i].size() != t.header.size() || t.rows[i][c_id] != table.row_ids[i]) {
            fail(ErrorCode::ShapeMismatch, path.string() + ": row ids differ from table at line " + std::to_string(t.lines[i]));
        }
        const auto& set = t.rows[i][c_set];
        if (set == "train") s.assignment[i] = Partition::Train;
        else if (set == "cv") s.assignment[i] = Partition::CrossValidation;
        else if (set == "test") s.assignment[i] = Partition::Test;
        else fail(ErrorCode::SchemaMismatch, path.string() + ": unknown set '" + set + "'");
    }
    return s;
}

// ---------------------------------------------------------------------------

std::map<std::string, std::vector<std::size_t>> variable_sets(const FeatureTable& table) {
    std::map<std::string, std::vector<std::size_t>> sets;
    for (const char* name : kVariableSetNames) sets[name];
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        const auto& c = table.columns[i];
        if (c.role == Role::Location) sets["beforehand"].push_back(i);
        if (c.role == Role::Storm || c.role == Role::EventTime || c.role == Role::EventDate) {
            sets["storm_characteristic"].push_back(i);
        }
        sets["combined"].push_back(i);
        if (c.source != Source::NLCD) sets["no_lc"].push_back(i);
        if (c.source != Source::ACS && c.source != Source::Mixed) sets["no_acs"].push_back(i);
    }
    return sets;
}

std::vector<std::size_t> variable_set(const FeatureTable& table, const std::string& name) {
    auto sets = variable_sets(table);
    const auto it = sets.find(name);
    if (it == sets.end()) fail(ErrorCode::InvalidArgument, "unknown variable set '" + name + "'");
    if (it->second.empty()) fail(ErrorCode::InvalidArgument, "variable set '" + name + "' has no columns");
    return it->second;
}

}  // namespace zinn
