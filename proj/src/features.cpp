#include "features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace zinn {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

AggregationRecipe sum(std::string name, std::vector<std::string> inputs) {
    return {std::move(name), AggregationOp::Sum, std::move(inputs), {}, 1.0};
}

AggregationRecipe percent(std::string name, std::vector<std::string> numerator, std::string denominator) {
    return {std::move(name), AggregationOp::RatioOfSums, std::move(numerator), {std::move(denominator)}, 100.0};
}

std::vector<std::string> expand(const std::string& prefix, std::initializer_list<const char*> parts) {
    std::vector<std::string> out;
    for (const char* p : parts) out.push_back(prefix + p);
    return out;
}

const char* op_name(AggregationOp op) {
    switch (op) {
        case AggregationOp::Sum: return "sum";
        case AggregationOp::RatioOfSums: return "ratio";
        case AggregationOp::Product: return "product";
    }
    return "sum";
}

AggregationOp op_from(const std::string& s) {
    if (s == "sum") return AggregationOp::Sum;
    if (s == "ratio") return AggregationOp::RatioOfSums;
    if (s == "product") return AggregationOp::Product;
    fail(ErrorCode::InvalidArgument, "unknown aggregation op '" + s + "'");
}

}  // namespace

std::vector<std::string> FeatureConfig::regional_inputs() const {
    std::set<std::string> seen;
    std::vector<std::string> out;
    for (const auto& r : recipes) {
        for (const auto* list : {&r.inputs, &r.denominator}) {
            for (const auto& c : *list) {
                if (seen.insert(c).second) out.push_back(c);
            }
        }
    }
    return out;
}

void FeatureConfig::validate_against(const std::vector<std::string>& columns) const {
    const std::set<std::string> have(columns.begin(), columns.end());
    for (const auto& c : regional_inputs()) {
        if (!have.count(c)) {
            fail(ErrorCode::SchemaMismatch, "aggregation recipe references unknown regional column '" + c + "'");
        }
    }
}

FeatureConfig default_feature_config() {
    FeatureConfig c;
    c.multi_vortex_patterns = {"multi-vortex", "multi vortex", "multivortex", "multiple vort"};
    // Midpoints of the NLCD developed-class impervious ranges.
    c.impervious_medians = {{21, 10.0}, {22, 35.0}, {23, 65.0}, {24, 90.0}};
    c.land_cover_classes = {
        {11, "nlcd_open_water"},       {21, "nlcd_developed_open"},     {22, "nlcd_developed_low"},
        {23, "nlcd_developed_medium"}, {24, "nlcd_developed_high"},     {31, "nlcd_barren"},
        {41, "nlcd_deciduous_forest"}, {42, "nlcd_evergreen_forest"},   {43, "nlcd_mixed_forest"},
        {52, "nlcd_shrub_scrub"},      {81, "nlcd_pasture_hay"},        {82, "nlcd_cultivated_crops"},
        {90, "nlcd_woody_wetlands"},   {95, "nlcd_emergent_wetlands"},
    };
    c.excluded_land_classes = {0, 12};
    c.wooded_classes = {41, 42, 43, 90};

    const auto ages = expand("", {"male_65_66", "male_67_69", "male_70_74", "male_75_79", "male_80_84",
                                  "male_85_over", "female_65_66", "female_67_69", "female_70_74",
                                  "female_75_79", "female_80_84", "female_85_over"});
    std::vector<std::string> not_working;
    for (const char* status : {"never_married", "married", "separated", "widowed", "divorced"}) {
        for (const char* sex : {"male", "female"}) {
            for (const char* labor : {"unemployed", "not_in_labor_force"}) {
                not_working.push_back(std::string(status) + "_" + sex + "_" + labor);
            }
        }
    }
    c.recipes = {
        sum("median_household_income", {"median_household_income"}),
        percent("pct_mobile_homes", {"mobile_homes"}, "housing_units"),
        sum("population", {"total_population"}),
        sum("median_year_built", {"median_year_built"}),
        sum("number_of_homes", {"housing_units"}),
        percent("pct_white", {"white"}, "total_population"),
        percent("pct_male", {"male"}, "total_population"),
        percent("pct_under_18", {"under_18"}, "total_population"),
        percent("pct_high_school", {"high_school_male", "high_school_female"}, "adults_18_over"),
        percent("pct_associates", {"associates_male", "associates_female"}, "adults_18_over"),
        percent("pct_bachelors", {"bachelors_male", "bachelors_female"}, "adults_18_over"),
        percent("pct_graduate",
                {"masters_male", "professional_male", "doctorate_male", "masters_female",
                 "professional_female", "doctorate_female"},
                "adults_18_over"),
        percent("pct_over_65", ages, "total_population"),
        sum("lower_quartile_home_value", {"lower_quartile_home_value"}),
        sum("median_home_value", {"median_home_value"}),
        sum("upper_quartile_home_value", {"upper_quartile_home_value"}),
        percent("pct_poverty", {"poverty_last_12_months"}, "total_population"),
        sum("gini_index", {"gini_index"}),
        percent("pct_not_working", not_working, "adults_18_over"),
        percent("pct_commute_over_30",
                {"commute_30_34", "commute_35_39", "commute_40_44", "commute_45_59", "commute_60_89",
                 "commute_90_over"},
                "adults_18_over"),
        percent("pct_depart_0000_0459", {"depart_0000_0459"}, "adults_18_over"),
    };
    return c;
}

FeatureConfig feature_config_from_json(const std::string& text) {
    FeatureConfig c = default_feature_config();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaMismatch, std::string("feature config is not valid JSON: ") + e.what());
    }
    try {
        if (j.contains("multi_vortex_patterns")) {
            c.multi_vortex_patterns = j.at("multi_vortex_patterns").get<std::vector<std::string>>();
        }
        if (j.contains("impervious_medians")) {
            c.impervious_medians.clear();
            for (auto& [k, v] : j.at("impervious_medians").items()) c.impervious_medians[std::stoi(k)] = v.get<double>();
        }
        if (j.contains("land_cover_classes")) {
            c.land_cover_classes.clear();
            for (auto& [k, v] : j.at("land_cover_classes").items()) {
                c.land_cover_classes[std::stoi(k)] = v.get<std::string>();
            }
        }
        if (j.contains("excluded_land_classes")) {
            c.excluded_land_classes = j.at("excluded_land_classes").get<std::vector<int>>();
        }
        if (j.contains("wooded_classes")) c.wooded_classes = j.at("wooded_classes").get<std::vector<int>>();
        if (j.contains("aggregations")) {
            c.recipes.clear();
            for (const auto& r : j.at("aggregations")) {
                AggregationRecipe recipe;
                recipe.name = r.at("name").get<std::string>();
                recipe.op = op_from(r.at("op").get<std::string>());
                if (recipe.op == AggregationOp::RatioOfSums) {
                    recipe.inputs = r.at("numerator").get<std::vector<std::string>>();
                    recipe.denominator = r.at("denominator").get<std::vector<std::string>>();
                } else {
                    recipe.inputs = r.at("inputs").get<std::vector<std::string>>();
                }
                recipe.scale = r.value("scale", 1.0);
                if (recipe.inputs.empty() ||
                    (recipe.op == AggregationOp::RatioOfSums && recipe.denominator.empty())) {
                    fail(ErrorCode::SchemaMismatch, "aggregation '" + recipe.name + "' has no inputs");
                }
                c.recipes.push_back(std::move(recipe));
            }
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaMismatch, std::string("feature config: ") + e.what());
    } catch (const std::invalid_argument&) {
        fail(ErrorCode::SchemaMismatch, "feature config: land-cover class keys must be integers");
    }
    return c;
}

std::string feature_config_to_json(const FeatureConfig& c) {
    json j;
    j["multi_vortex_patterns"] = c.multi_vortex_patterns;
    for (auto [k, v] : c.impervious_medians) j["impervious_medians"][std::to_string(k)] = v;
    for (const auto& [k, v] : c.land_cover_classes) j["land_cover_classes"][std::to_string(k)] = v;
    j["excluded_land_classes"] = c.excluded_land_classes;
    j["wooded_classes"] = c.wooded_classes;
    j["aggregations"] = json::array();
    for (const auto& r : c.recipes) {
        json o{{"name", r.name}, {"op", op_name(r.op)}};
        if (r.op == AggregationOp::RatioOfSums) {
            o["numerator"] = r.inputs;
            o["denominator"] = r.denominator;
        } else {
            o["inputs"] = r.inputs;
        }
        if (r.scale != 1.0) o["scale"] = r.scale;
        j["aggregations"].push_back(std::move(o));
    }
    return j.dump(2) + "\n";
}

FeatureConfig read_feature_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return feature_config_from_json(ss.str());
}

bool multi_vortex_flag(const std::string& narrative, const std::vector<std::string>& patterns) {
    const std::string text = lower(narrative);
    return std::any_of(patterns.begin(), patterns.end(), [&](const std::string& p) {
        return !p.empty() && text.find(lower(p)) != std::string::npos;
    });
}

NaturalRecord apply_recipes(const std::map<std::string, double>& raw, const std::vector<AggregationRecipe>& recipes) {
    auto total = [&](const std::vector<std::string>& cols, bool product) {
        double acc = product ? 1.0 : 0.0;
        for (const auto& c : cols) {
            const auto it = raw.find(c);
            if (it == raw.end() || std::isnan(it->second)) return kNaN;
            acc = product ? acc * it->second : acc + it->second;
        }
        return acc;
    };
    NaturalRecord out;
    for (const auto& r : recipes) {
        double v = kNaN;
        switch (r.op) {
            case AggregationOp::Sum: v = total(r.inputs, false); break;
            case AggregationOp::Product: v = total(r.inputs, true); break;
            case AggregationOp::RatioOfSums: {
                const double num = total(r.inputs, false);
                const double den = total(r.denominator, false);
                // Zero denominator surfaces as a missing feature.
                v = den != 0.0 ? num / den : kNaN;
                break;
            }
        }
        out[r.name] = std::isnan(v) ? kNaN : v * r.scale;
    }
    return out;
}

NaturalRecord derive_storm_features(const TornadoEvent& e, const FeatureConfig& config) {
    return {
        {"tornado_duration", e.duration_s},
        {"begin_lat", e.begin_lat},
        {"begin_lon", e.begin_lon},
        {"tornado_length", e.length},
        {"tornado_width", e.width},
        {"tornado_area", e.length * e.width},
        {"multi_vortex", multi_vortex_flag(e.narrative, config.multi_vortex_patterns) ? 1.0 : 0.0},
        {"begin_time", e.begin.minutes_since_midnight()},
        {"year", static_cast<double>(e.begin.year)},
        {"day_of_year", static_cast<double>(e.begin.day_of_year())},
    };
}

NaturalRecord derive_land_features(const std::map<int, double>& proportions, const FeatureConfig& config) {
    auto prop = [&](int code) {
        const auto it = proportions.find(code);
        return it == proportions.end() ? 0.0 : it->second;
    };
    NaturalRecord out;
    for (const auto& [code, name] : config.land_cover_classes) out[name] = prop(code);
    double intensity = 0.0;
    for (auto [code, median] : config.impervious_medians) intensity += prop(code) * median;
    double wooded = 0.0;
    for (int code : config.wooded_classes) wooded += prop(code);
    out["total_developed_intensity"] = intensity;
    out["total_wooded_proportion"] = wooded;
    out["wooded_developed_interaction"] = intensity * wooded;
    return out;
}

void derive_mixed_features(NaturalRecord& record) {
    const auto area = record.find("tornado_area");
    const auto income = record.find("median_household_income");
    record["total_income_estimate"] =
        (area == record.end() || income == record.end()) ? kNaN : area->second * income->second;
}

NaturalRecord derive_event_features(const TornadoEvent& event, const std::map<int, double>& land_proportions,
                                    const std::map<std::string, double>& regional_raw, const FeatureConfig& config) {
    NaturalRecord record = derive_storm_features(event, config);
    record.merge(derive_land_features(land_proportions, config));
    record.merge(apply_recipes(regional_raw, config.recipes));
    derive_mixed_features(record);
    return record;
}

// ---------------------------------------------------------------------------
// Roster

std::string to_string(Source s) {
    switch (s) {
        case Source::StormEvents: return "storm_events";
        case Source::NLCD: return "nlcd";
        case Source::ACS: return "acs";
        case Source::Mixed: return "mixed";
    }
    return "storm_events";
}

Source source_from_string(const std::string& s) {
    if (s == "storm_events") return Source::StormEvents;
    if (s == "nlcd") return Source::NLCD;
    if (s == "acs") return Source::ACS;
    if (s == "mixed") return Source::Mixed;
    fail(ErrorCode::UnknownSourceTag, "unknown source tag '" + s + "'");
}

std::string to_string(Role r) {
    switch (r) {
        case Role::Location: return "location";
        case Role::Storm: return "storm";
        case Role::EventTime: return "event_time";
        case Role::EventDate: return "event_date";
        case Role::Mixed: return "mixed";
    }
    return "storm";
}

Role role_from_string(const std::string& s) {
    if (s == "location") return Role::Location;
    if (s == "storm") return Role::Storm;
    if (s == "event_time") return Role::EventTime;
    if (s == "event_date") return Role::EventDate;
    if (s == "mixed") return Role::Mixed;
    fail(ErrorCode::UnknownSourceTag, "unknown variable role '" + s + "'");
}

std::vector<VariableDescriptor> default_roster() {
    using K = TransformKind;
    auto storm = [](std::string n, std::string l, Role role, K k, std::string unit) {
        return VariableDescriptor{std::move(n), std::move(l), Source::StormEvents, role, k, std::nullopt, std::move(unit)};
    };
    auto nlcd = [](std::string n, std::string l) {
        return VariableDescriptor{std::move(n), std::move(l), Source::NLCD, Role::Location, K::Log1000Standardize,
                                  std::nullopt, "proportion"};
    };
    auto acs = [](std::string n, std::string l, K k, std::string unit) {
        return VariableDescriptor{std::move(n), std::move(l), Source::ACS, Role::Location, k, std::nullopt, std::move(unit)};
    };

    std::vector<VariableDescriptor> r = {
        storm("tornado_duration", "Tornado Duration", Role::Storm, K::Log1pStandardize, "s"),
        storm("begin_lat", "Beginning Latitude", Role::Location, K::Standardize, "deg"),
        storm("begin_lon", "Beginning Longitude", Role::Location, K::Standardize, "deg"),
        storm("tornado_length", "Tornado Length", Role::Storm, K::Log1pStandardize, "source"),
        storm("tornado_width", "Tornado Width", Role::Storm, K::Log1pStandardize, "source"),
        storm("tornado_area", "Tornado Area", Role::Storm, K::Log1pStandardize, "source^2"),
        storm("multi_vortex", "Multi-Vortex Indicator", Role::Storm, K::Identity, "indicator"),
        storm("begin_time", "Beginning Time of Tornado Event", Role::EventTime, K::Log1pStandardize, "min"),
        storm("year", "Year of Tornado Event", Role::EventDate, K::Standardize, "year"),
        storm("day_of_year", "Day of the Year of Tornado Event", Role::EventDate, K::Log1000Standardize, "day"),
        nlcd("nlcd_open_water", "Open Water Proportion"),
        nlcd("nlcd_developed_open", "Developed Open Space Proportion"),
        nlcd("nlcd_developed_low", "Developed Low Intensity Proportion"),
        nlcd("nlcd_developed_medium", "Developed Medium Intensity Proportion"),
        nlcd("nlcd_developed_high", "Developed High Intensity Proportion"),
        nlcd("nlcd_barren", "Barren Land Proportion"),
        nlcd("nlcd_deciduous_forest", "Deciduous Forest Proportion"),
        nlcd("nlcd_evergreen_forest", "Evergreen Forest Proportion"),
        nlcd("nlcd_mixed_forest", "Mixed Forest Proportion"),
        nlcd("nlcd_shrub_scrub", "Shrub/Scrub Proportion"),
        nlcd("nlcd_pasture_hay", "Pasture/Hay Proportion"),
        nlcd("nlcd_cultivated_crops", "Cultivated Crops Proportion"),
        nlcd("nlcd_woody_wetlands", "Woody Wetland Proportion"),
        nlcd("nlcd_emergent_wetlands", "Emergent Herbaceous Wetland Proportion"),
        nlcd("total_developed_intensity", "Total Developed Intensity"),
        nlcd("total_wooded_proportion", "Total Wooded Proportion"),
        nlcd("wooded_developed_interaction", "Total Wooded-Developed Interaction"),
        acs("median_household_income", "Median Household Income", K::Log1000Standardize, "usd"),
        acs("pct_mobile_homes", "Percent Homes that are Mobile", K::Standardize, "percent"),
        acs("population", "Population", K::Log1pStandardize, "people"),
        acs("median_year_built", "Median Year Structure Built", K::Log1pStandardize, "year"),
        acs("number_of_homes", "Number of Homes", K::Log1pStandardize, "homes"),
        acs("pct_white", "Percent of Pop. that are White", K::Standardize, "percent"),
        acs("pct_male", "Percent of Pop. that are Male", K::Standardize, "percent"),
        acs("pct_under_18", "Percent of Pop. that are under 18 years old", K::Standardize, "percent"),
        acs("pct_high_school", "Percent of Adults that have High School Education", K::Standardize, "percent"),
        acs("pct_associates", "Percent of Adults that have Associates", K::Standardize, "percent"),
        acs("pct_bachelors", "Percent of Adults that have Bachelors", K::Standardize, "percent"),
        acs("pct_graduate", "Percent of Adults that have Graduate", K::Standardize, "percent"),
        acs("pct_over_65", "Percent of Pop. that are over 65 years old", K::Standardize, "percent"),
        acs("lower_quartile_home_value", "Lower Quartile Home Value", K::Log1pStandardize, "usd"),
        acs("median_home_value", "Median Home Value", K::Log1pStandardize, "usd"),
        acs("upper_quartile_home_value", "Upper Quartile Home Value", K::Log1pStandardize, "usd"),
        acs("pct_poverty", "Percent of Pop. Experienced Poverty Last 12 Months", K::Log1pStandardize, "percent"),
        acs("gini_index", "Gini Index", K::Log1pStandardize, "index"),
        acs("pct_not_working", "Percent of Adults not Working", K::Standardize, "percent"),
        acs("pct_commute_over_30", "Percent of Adults that Commute over 30min", K::Standardize, "percent"),
        acs("pct_depart_0000_0459", "Percent of Adults that Depart between 00:00 and 04:59", K::Standardize,
            "percent"),
        VariableDescriptor{"total_income_estimate", "Total Income Estimate for Tornado Area", Source::Mixed,
                           Role::Mixed, K::Standardize, std::nullopt, "usd*source^2"},
    };
    for (auto& v : r) {
        if (v.name == "begin_time") v.spline = time_of_day_basis();
        if (v.name == "day_of_year") v.spline = day_of_year_basis();
    }
    return r;
}

std::vector<VariableDescriptor> roster_from_json(const std::string& text) {
    std::vector<VariableDescriptor> out;
    try {
        const json j = json::parse(text);
        for (const auto& v : j.at("variables")) {
            VariableDescriptor d;
            d.name = v.at("name").get<std::string>();
            d.label = v.value("label", d.name);
            d.source = source_from_string(v.at("source").get<std::string>());
            d.role = role_from_string(v.at("role").get<std::string>());
            d.transform = transform_kind_from_string(v.at("transform").get<std::string>());
            d.unit = v.value("unit", "");
            if (v.contains("spline")) {
                const auto& s = v.at("spline");
                d.spline = SplineBasisSpec{s.value("degree", 3), s.at("interior_knots").get<int>(),
                                           s.at("lo").get<double>(), s.at("hi").get<double>()};
            }
            out.push_back(std::move(d));
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaMismatch, std::string("roster: ") + e.what());
    }
    return out;
}

std::string roster_to_json(const std::vector<VariableDescriptor>& roster) {
    json j;
    j["variables"] = json::array();
    for (const auto& v : roster) {
        json o{{"name", v.name},
               {"label", v.label},
               {"source", to_string(v.source)},
               {"role", to_string(v.role)},
               {"transform", std::string(to_string(v.transform))},
               {"unit", v.unit}};
        if (v.spline) {
            o["spline"] = {{"degree", v.spline->degree},
                           {"interior_knots", v.spline->interior_knots},
                           {"lo", v.spline->lo},
                           {"hi", v.spline->hi}};
        }
        j["variables"].push_back(std::move(o));
    }
    return j.dump(2) + "\n";
}

}  // namespace zinn
