#include "synthetic.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "csv.hpp"
#include "geometry.hpp"
#include "protocol.hpp"
#include "raster.hpp"
#include "rng.hpp"

namespace zinn::testing {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

const TransformSpec kOutcomeSpec{TransformKind::Log1pStandardize, 10.0, 1.5};

std::string two(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

}  // namespace

SyntheticZi make_zi_table(std::size_t n, std::uint64_t seed, const ZiProcess& p) {
    if (p.features < 4) throw std::invalid_argument("the process reads four predictors");
    Rng rng(seed);
    SyntheticZi s;
    s.noise_variance = p.sigma * p.sigma;
    auto& t = s.table;
    t.outcome_spec = kOutcomeSpec;
    t.x = Matrix(n, p.features);
    for (std::size_t j = 0; j < p.features; ++j) {
        const std::string name = "x" + std::to_string(j);
        ColumnDescriptor c;
        c.name = c.variable = name;
        c.transform = {TransformKind::Standardize, 0.0, 1.0};
        t.columns.push_back(c);
        VariableDescriptor v;
        v.name = v.label = name;
        t.roster.push_back(v);
        t.natural_means[name] = 0.0;
    }
    const double zero_outcome = apply_transform(kOutcomeSpec, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p.features; ++j) t.x(i, j) = rng.normal();
        const double x0 = t.x(i, 0), x1 = t.x(i, 1), x2 = t.x(i, 2), x3 = t.x(i, 3);
        const double prob = sigmoid(p.intercept + p.x0 * x0 - p.x1 * x1 + p.x2x3 * x2 * x3);
        const double mean = 0.8 * x0 + 0.5 * (x1 * x1 - 1.0) + 0.5 * std::tanh(x2);
        const bool damage = rng.bernoulli(prob);
        const double z = mean + p.sigma * rng.normal();
        s.true_probability.push_back(prob);
        s.true_mean.push_back(mean);
        t.row_ids.push_back("s" + std::to_string(i));
        t.lat.push_back(35.0 + rng.uniform());
        t.lon.push_back(-100.0 + rng.uniform());
        t.outcome.push_back(damage ? z : zero_outcome);
        t.outcome_raw.push_back(damage ? invert_transform(kOutcomeSpec, z) : 0.0);
    }
    return s;
}

ZilnSample make_ziln_sample(std::size_t n, std::uint64_t seed, double sigma) {
    ZilnSample s;
    s.sigma = sigma;
    s.logistic = {-0.3, 1.0, -0.7, 0.4};
    s.linear = {0.5, 0.8, -0.4, 0.2};
    const std::size_t k = s.logistic.size() - 1;
    Rng rng(seed);
    s.x = Matrix(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        double eta = s.logistic[0], mu = s.linear[0];
        for (std::size_t j = 0; j < k; ++j) {
            s.x(i, j) = rng.normal();
            eta += s.logistic[j + 1] * s.x(i, j);
            mu += s.linear[j + 1] * s.x(i, j);
        }
        s.labels.push_back(rng.bernoulli(sigmoid(eta)) ? 1.0 : 0.0);
        s.outcome.push_back(mu + sigma * rng.normal());
    }
    return s;
}

namespace {

constexpr double kWest = -100.0, kSouth = 35.0, kCell = 0.01;
constexpr int kCols = 400, kRows = 300, kBlock = 10;

CategoricalRaster sample_raster(Rng& rng, const std::vector<std::int32_t>& base, int vintage) {
    CategoricalRaster r;
    r.ncols = kCols;
    r.nrows = kRows;
    r.west = kWest;
    r.south = kSouth;
    r.cell_deg = kCell;
    r.vintage = vintage;
    r.codes.resize(static_cast<std::size_t>(kCols) * kRows);
    static const std::int32_t classes[] = {11, 21, 22, 23, 24, 31, 41, 42, 43, 52, 81, 82, 90, 95};
    const int bx = kCols / kBlock;
    for (int row = 0; row < kRows; ++row) {
        for (int col = 0; col < kCols; ++col) {
            auto code = base[static_cast<std::size_t>(row / kBlock) * bx + col / kBlock];
            // Later vintages develop a little.
            if (vintage > 2001 && (code == 81 || code == 82) && rng.uniform() < 0.02 * (vintage - 2001) / 5.0) code = 22;
            const double u = rng.uniform();
            if (u < 0.002) code = r.nodata;
            else if (u < 0.003) code = 12;
            else if (u < 0.004) code = 0;
            else if (u < 0.05) code = classes[rng.below(std::size(classes))];
            r.codes[static_cast<std::size_t>(row) * kCols + col] = code;
        }
    }
    return r;
}

}  // namespace

SamplePaths write_sample_sources(const std::filesystem::path& dir, const SampleOptions& o) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    Rng rng(derive_seed(o.seed, 100));
    SamplePaths paths;
    paths.dir = dir;

    // Land cover: one-block classes drawn with plausible weights.
    static const std::pair<std::int32_t, double> weights[] = {
        {11, 0.04}, {21, 0.06}, {22, 0.05}, {23, 0.03}, {24, 0.02}, {31, 0.02}, {41, 0.08},
        {42, 0.05}, {43, 0.04}, {52, 0.12}, {81, 0.17}, {82, 0.25}, {90, 0.04}, {95, 0.03},
    };
    std::vector<std::int32_t> base(static_cast<std::size_t>(kCols / kBlock) * (kRows / kBlock));
    for (auto& b : base) {
        double u = rng.uniform();
        b = weights[0].first;
        for (const auto& [code, w] : weights) {
            if (u < w) {
                b = code;
                break;
            }
            u -= w;
        }
    }
    nlohmann::json land;
    for (int vintage : {2001, 2006, 2011}) {
        const auto name = "nlcd_" + std::to_string(vintage) + ".asc";
        write_ascii_grid(dir / name, sample_raster(rng, base, vintage));
        land[std::to_string(vintage)] = name;
    }

    // Regions: a 4 x 3 grid of one-degree cells.
    std::vector<PolygonSet> regions;
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 4; ++i) {
            PolygonSet p;
            p.id = "R" + std::to_string(j) + std::to_string(i);
            const double w = kWest + i, s = kSouth + j;
            p.rings.push_back(Ring{{w, w + 1, w + 1, w}, {s, s, s + 1, s + 1}});
            regions.push_back(p);
        }
    }
    write_polygons(dir / "regions.csv", regions);
    {
        const auto columns = default_feature_config().regional_inputs();
        std::ofstream out(dir / "region_values.csv");
        out << "region_id,year";
        for (const auto& c : columns) out << ',' << c;
        out << '\n';
        for (std::size_t r = 0; r < regions.size(); ++r) {
            const double pop = rng.uniform(2e4, 2e5);
            const double income = rng.uniform(3e4, 8e4);
            const double home = rng.uniform(8e4, 3e5);
            for (int year = 2009; year <= 2018; ++year) {
                const double g = 1.0 + 0.01 * (year - 2009);
                out << regions[r].id << ',' << year;
                for (const auto& c : columns) {
                    double v;
                    if (c == "total_population") v = std::round(pop * g);
                    else if (c == "housing_units") v = std::round(0.45 * pop * g);
                    else if (c == "adults_18_over") v = std::round(0.75 * pop * g);
                    else if (c == "median_household_income") v = std::round(income * g * rng.uniform(0.97, 1.03));
                    else if (c == "median_year_built") v = std::round(rng.uniform(1950, 1990));
                    else if (c == "lower_quartile_home_value") v = std::round(0.6 * home * g);
                    else if (c == "median_home_value") v = std::round(home * g);
                    else if (c == "upper_quartile_home_value") v = std::round(1.6 * home * g);
                    else if (c == "gini_index") v = rng.uniform(0.35, 0.5);
                    else if (c == "white" || c == "male") v = std::round(pop * g * rng.uniform(0.45, 0.8));
                    else if (c == "under_18") v = std::round(pop * g * rng.uniform(0.18, 0.28));
                    else v = std::round(pop * g * rng.uniform(0.0, 0.02));
                    // One region misses home values in its first year.
                    if (r == 0 && year == 2009 && c == "median_home_value") {
                        out << ",NA";
                        continue;
                    }
                    out << ',' << csv::format_number(v);
                }
                out << '\n';
            }
        }
    }

    // CPI 1996-01 .. 2019-12.
    {
        std::ofstream out(dir / "cpi.csv");
        out << "month,index\n";
        double index = 155.0;
        for (int y = 1996; y <= 2019; ++y) {
            for (int m = 1; m <= 12; ++m) {
                out << y << '-' << two(m) << ',' << csv::format_number(std::round(index * 1000.0) / 1000.0) << '\n';
                index *= 1.0019;
            }
        }
    }

    // Events.
    paths.events = dir / "events.csv";
    {
        std::ofstream out(paths.events);
        out << "event_id,begin_lat,begin_lon,begin_datetime,duration_s,length,width,damage_usd,narrative\n";
        auto write = [&](const std::string& id, double lat, double lon, int year) {
            const int month = 1 + static_cast<int>(rng.below(12));
            const int day = 1 + static_cast<int>(rng.below(28));
            const int hour = static_cast<int>(rng.below(24));
            const int minute = static_cast<int>(rng.below(60));
            const double length = std::exp(rng.normal() * 1.0 + 0.5);
            const double width = std::round(std::exp(rng.normal() * 0.8 + 4.5));
            const double duration = std::round(std::max(30.0, 120.0 * length * rng.uniform(0.5, 1.5)));
            const bool mv = rng.uniform() < 0.1;
            const double eta = -0.3 + 0.9 * std::log(length) + 0.5 * std::log(width / 90.0);
            double damage = 0.0;
            if (rng.uniform() < 1.0 / (1.0 + std::exp(-eta))) {
                damage = std::round(std::exp(9.5 + 0.8 * std::log(length) + 0.6 * std::log(width / 90.0) +
                                             (mv ? 0.5 : 0.0) + 0.8 * rng.normal()));
            }
            out << id << ',' << csv::format_number(std::round(lat * 1e4) / 1e4) << ','
                << csv::format_number(std::round(lon * 1e4) / 1e4) << ',' << year << '-' << two(month) << '-'
                << two(day) << 'T' << two(hour) << ':' << two(minute) << ":00," << csv::format_number(duration)
                << ',' << csv::format_number(std::round(length * 100) / 100) << ',' << csv::format_number(width)
                << ',' << csv::format_number(damage) << ','
                << csv::quote(mv ? "A multi-vortex tornado, damage to barns, trees." : "Tornado touched down.")
                << '\n';
        };
        for (std::size_t i = 0; i < o.events; ++i) {
            write("E" + std::to_string(i + 1), rng.uniform(35.3, 37.7), rng.uniform(-99.7, -96.3),
                  1997 + static_cast<int>(rng.below(22)));
        }
        for (std::size_t i = 0; i < o.out_of_window; ++i) {
            write("W" + std::to_string(i + 1), rng.uniform(35.3, 37.7), rng.uniform(-99.7, -96.3),
                  i % 2 ? 2020 : 1995);
        }
        static const char* bad[] = {
            "B1,abc,-98.0,2005-05-05T12:00:00,60,1.0,50,0,bad latitude",
            "B2,36.0,-98.0,not-a-date,60,1.0,50,0,bad date",
            "B3,36.0,-98.0,2005-05-05T12:00:00,60,1.0,-5,0,negative width",
            "B4,36.0,-98.0,2005-05-05T12:00:00,60,1.0,50,-10,negative damage",
        };
        for (std::size_t i = 0; i < o.bad_rows; ++i) out << bad[i % std::size(bad)] << '\n';
    }

    // Boundary and cities.
    paths.boundary = dir / "boundary.csv";
    write_polygons(paths.boundary,
                   {PolygonSet{"sample", {Ring{{-100, -96, -96, -100}, {35, 35, 38, 38}}}, {}}});
    paths.cities = dir / "cities.csv";
    {
        std::ofstream out(paths.cities);
        out << "name,lat,lon,population\n"
            << "Northtown,37.6,-97.3,390000\n"
            << "Southfield,35.5,-97.5,650000\n"
            << "Smallville,36.2,-98.4,12000\n"
            << "Eastport,36.1,-96.4,100000\n";
    }

    paths.manifest = dir / "manifest.json";
    nlohmann::json m{{"events", "events.csv"},
                     {"cpi", "cpi.csv"},
                     {"land_cover", land},
                     {"region_geometry", "regions.csv"},
                     {"region_values", "region_values.csv"},
                     {"study_window", {"1997-01-01", "2018-12-31T23:59:59"}}};
    std::ofstream(paths.manifest) << m.dump(2) << '\n';
    return paths;
}

}  // namespace zinn::testing

namespace zinn::testing {

SampleModel make_sample_model(const std::filesystem::path& dir, std::uint64_t seed) {
    SampleModel m;
    m.paths = write_sample_sources(dir, {.seed = seed});
    auto assembled = assemble_from_manifest(m.paths.manifest);
    m.table = std::move(assembled.table);
    m.split = split(m.table.rows(), seed);
    m.context = load_location_context(read_manifest(m.paths.manifest));

    ZiTrainOptions o;
    o.seed = seed;
    o.train.epochs = 20;
    SweepOptions so;
    so.family = ArchitectureFamily::Wide;
    so.widths = {8};
    so.kind = ModelKind::Conditional;
    o.conditional = make_candidates(m.table, so);
    so.kind = ModelKind::Classifier;
    o.classifier = make_candidates(m.table, so);
    auto r = train_zero_inflated(m.table, m.split, o);

    m.bundle.created = "2020-01-01T00:00:00Z";
    m.bundle.model = std::move(r.model);
    m.bundle.natural_means = m.table.natural_means;
    m.bundle.roster = m.table.roster;
    m.bundle.config = m.table.config;
    m.bundle.metadata = R"({"source":"sample"})";
    m.bundle_path = dir / "model.zinn";
    save_bundle(m.bundle_path, m.bundle);
    return m;
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("zinn-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace zinn::testing
