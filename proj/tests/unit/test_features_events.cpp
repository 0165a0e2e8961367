#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "check.hpp"
#include "csv.hpp"
#include "dataset.hpp"
#include "events.hpp"
#include "features.hpp"
#include "inflation.hpp"
#include "synthetic.hpp"

using namespace zinn;
using zinn::testing::error_code;

namespace {

const char* kHeader = "event_id,begin_lat,begin_lon,begin_datetime,duration_s,length,width,damage_usd,narrative\n";

}  // namespace

TEST_CASE("csv parsing handles quotes and numbers", "[csv]") {
    const auto t = csv::parse("a,b\n\"x, y\",\"he said \"\"hi\"\"\"\n1,\"multi\nline\"\n");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "x, y");
    CHECK(t.rows[0][1] == "he said \"hi\"");
    CHECK(t.rows[1][1] == "multi\nline");
    CHECK(csv::parse_number("1.5") == 1.5);
    CHECK_FALSE(csv::parse_number("NA").has_value());
    CHECK_FALSE(csv::parse_number("1.5x").has_value());
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123}) CHECK(*csv::parse_number(csv::format_number(v)) == v);
    CHECK(error_code([] { (void)csv::parse(""); }) == ErrorCode::EmptyFile);
}

TEST_CASE("event ingest validates rows", "[events]") {
    std::string text = kHeader;
    text += "E1,36.5,-97.5,2005-05-05T12:30:00,600,2.5,100,25000,\"A multi-vortex tornado.\"\n";
    text += "E2,36.5,-97.5,2005-05-05 13:00,600,2.5,100,0,Quiet\n";
    text += "E3,abc,-97.5,2005-05-05T12:30:00,600,2.5,100,0,x\n";
    text += "E4,36.5,-97.5,2005-13-05T12:30:00,600,2.5,100,0,x\n";
    text += "E5,36.5,-97.5,2005-05-05T12:30:00,600,2.5,-1,0,x\n";
    text += "E6,36.5,-97.5,2005-05-05T12:30:00,600,2.5,100,-3,x\n";
    text += "E7,36.5,-97.5,1996-12-31T23:59:59,600,2.5,100,0,x\n";
    text += "E8,36.5,-97.5\n";
    const auto r = parse_events(text);
    REQUIRE(r.events.size() == 2);
    REQUIRE(r.rejects.size() == 6);
    CHECK(r.events[0].begin.minutes_since_midnight() == 750.0);
    CHECK(r.events[1].begin.hour == 13);
    CHECK(r.rejects[0].id == "E3");
    CHECK(r.rejects[0].line == 4);
    CHECK(r.rejects[4].reason == "date outside study window");
    CHECK(error_code([] { (void)parse_events("id,lat\n1,2\n"); }) == ErrorCode::SchemaMismatch);
}

TEST_CASE("dates", "[events]") {
    CHECK(parse_datetime("2016-03-01").day_of_year() == 61);
    CHECK(parse_datetime("2015-03-01").day_of_year() == 60);
    CHECK(parse_datetime("2016-12-31").day_of_year() == 366);
    CHECK(error_code([] { (void)parse_datetime("2015-02-30"); }) == ErrorCode::InvalidArgument);
    CHECK(error_code([] { (void)parse_datetime("2015-01-01T24:00"); }) == ErrorCode::InvalidArgument);
    CHECK(is_leap_year(2000));
    CHECK_FALSE(is_leap_year(1900));
}

TEST_CASE("multi-vortex pattern matching", "[features]") {
    CHECK(multi_vortex_flag("a violent multi-vortex tornado struck"));
    CHECK_FALSE(multi_vortex_flag(""));
    CHECK(multi_vortex_flag("MULTIPLE VORTICES were observed"));
    CHECK(multi_vortex_flag("Multi Vortex"));
    CHECK_FALSE(multi_vortex_flag("a single vortex"));
}

TEST_CASE("storm and land variables", "[features]") {
    TornadoEvent e;
    e.begin = parse_datetime("2012-02-29T06:15:30");
    e.duration_s = 300;
    e.length = 2.0;
    e.width = 50.0;
    e.begin_lat = 35.0;
    e.begin_lon = -97.0;
    e.narrative = "multiple vortex";
    const auto cfg = default_feature_config();
    const auto s = derive_storm_features(e, cfg);
    CHECK(s.at("tornado_area") == 100.0);
    CHECK(s.at("multi_vortex") == 1.0);
    CHECK(s.at("begin_time") == 6 * 60 + 15.5);
    CHECK(s.at("day_of_year") == 60.0);
    CHECK(s.at("year") == 2012.0);

    // 10% open developed (10), 20% high (90), 30% deciduous, 40% crops.
    const std::map<int, double> props{{21, 0.1}, {24, 0.2}, {41, 0.3}, {82, 0.4}};
    const auto l = derive_land_features(props, cfg);
    CHECK(l.at("total_developed_intensity") == Catch::Approx(0.1 * 10 + 0.2 * 90));
    CHECK(l.at("total_wooded_proportion") == Catch::Approx(0.3));
    CHECK(l.at("wooded_developed_interaction") == Catch::Approx(19.0 * 0.3));
    CHECK(l.at("nlcd_open_water") == 0.0);
    CHECK(l.at("nlcd_cultivated_crops") == 0.4);

    NaturalRecord rec{{"tornado_area", 100.0}, {"median_household_income", 50000.0}};
    derive_mixed_features(rec);
    CHECK(rec.at("total_income_estimate") == 5e6);
}

TEST_CASE("aggregation recipes", "[features]") {
    const std::vector<AggregationRecipe> recipes{
        {"total", AggregationOp::Sum, {"a", "b"}, {}, 1.0},
        {"pct", AggregationOp::RatioOfSums, {"a"}, {"a", "b"}, 100.0},
        {"prod", AggregationOp::Product, {"a", "b"}, {}, 1.0},
        {"zero", AggregationOp::RatioOfSums, {"a"}, {"z"}, 1.0},
        {"gone", AggregationOp::Sum, {"missing"}, {}, 1.0},
    };
    const auto out = apply_recipes({{"a", 1.0}, {"b", 3.0}, {"z", 0.0}}, recipes);
    CHECK(out.at("total") == 4.0);
    CHECK(out.at("pct") == 25.0);
    CHECK(out.at("prod") == 3.0);
    CHECK(std::isnan(out.at("zero")));
    CHECK(std::isnan(out.at("gone")));
}

TEST_CASE("inflation adjustment is linear and multiplicative in the CPI ratio", "[inflation]") {
    CpiSeries cpi;
    cpi.index[{2018, 1}] = 250.0;
    cpi.index[{2000, 6}] = 170.0;
    cpi.index[{2010, 6}] = 218.0;
    const double base = adjust_inflation(1000.0, {2000, 6}, cpi);
    CHECK(base == Catch::Approx(1000.0 * 250.0 / 170.0));
    CHECK(adjust_inflation(3000.0, {2000, 6}, cpi) == Catch::Approx(3 * base));
    CHECK(adjust_inflation(0.0, {2000, 6}, cpi) == 0.0);
    auto doubled = cpi;
    doubled.index[{2018, 1}] = 500.0;
    CHECK(adjust_inflation(1000.0, {2000, 6}, doubled) == Catch::Approx(2 * base));
    CHECK(adjust_inflation(1000.0, {2018, 1}, cpi) == 1000.0);
    CHECK(error_code([&] { (void)adjust_inflation(1.0, {1990, 1}, cpi); }) == ErrorCode::MissingCpiMonth);

    const auto dir = zinn::testing::scratch_dir("cpi");
    std::ofstream(dir / "cpi.csv") << "month,index\n2018-01,250\n2000-06,170\n";
    CHECK(read_cpi(dir / "cpi.csv").at({2000, 6}) == 170.0);
}

TEST_CASE("default roster and variable-set membership", "[features]") {
    const auto roster = default_roster();
    std::set<std::string> names;
    for (const auto& v : roster) names.insert(v.name);
    CHECK(names.size() == roster.size());
    for (const char* n : {"tornado_duration", "begin_lat", "tornado_area", "multi_vortex", "begin_time", "day_of_year",
                          "total_developed_intensity", "pct_mobile_homes", "total_income_estimate"}) {
        CHECK(names.count(n) == 1);
    }
    // Synthetic table with one column per roster variable.
    FeatureTable t;
    for (const auto& v : roster) {
        ColumnDescriptor c;
        c.name = c.variable = v.name;
        c.source = v.source;
        c.role = v.role;
        t.columns.push_back(c);
    }
    const auto sets = variable_sets(t);
    auto has = [&](const std::string& set, const std::string& var) {
        const auto idx = *t.column_index(var);
        const auto& cols = sets.at(set);
        return std::find(cols.begin(), cols.end(), idx) != cols.end();
    };
    CHECK(has("combined", "total_income_estimate"));
    CHECK(has("no_lc", "total_income_estimate"));
    CHECK_FALSE(has("no_acs", "total_income_estimate"));
    CHECK_FALSE(has("no_lc", "nlcd_open_water"));
    CHECK(has("no_acs", "nlcd_open_water"));
    CHECK(has("beforehand", "pct_white"));
    CHECK_FALSE(has("beforehand", "tornado_length"));
    CHECK(has("storm_characteristic", "tornado_length"));
    CHECK(sets.at("combined").size() == roster.size());

    const auto back = roster_from_json(roster_to_json(roster));
    REQUIRE(back.size() == roster.size());
    CHECK(back[5].name == roster[5].name);
    CHECK(error_code([] { (void)source_from_string("census"); }) == ErrorCode::UnknownSourceTag);
}

TEST_CASE("shipped configuration equals the built-in defaults", "[features]") {
    std::ifstream in(std::string(ZINN_SOURCE_DIR) + "/data/default_config.json");
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(nlohmann::json::parse(ss.str()) == nlohmann::json::parse(feature_config_to_json(default_feature_config())));
    const auto cfg = feature_config_from_json(ss.str());
    CHECK(cfg.impervious_medians == default_feature_config().impervious_medians);

    std::ifstream rin(std::string(ZINN_SOURCE_DIR) + "/data/default_roster.json");
    REQUIRE(rin);
    std::stringstream rs;
    rs << rin.rdbuf();
    CHECK(nlohmann::json::parse(rs.str()) == nlohmann::json::parse(roster_to_json(default_roster())));
}
