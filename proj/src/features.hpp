#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "events.hpp"
#include "spline.hpp"
#include "transform.hpp"

namespace zinn {

// Natural-scale variable values by name; NaN marks a missing value.
using NaturalRecord = std::map<std::string, double>;

enum class AggregationOp { Sum, RatioOfSums, Product };

struct AggregationRecipe {
    std::string name;
    AggregationOp op = AggregationOp::Sum;
    std::vector<std::string> inputs;       // Sum, Product; numerator for RatioOfSums
    std::vector<std::string> denominator;  // RatioOfSums only
    double scale = 1.0;                    // e.g. 100 for percentages
};

struct FeatureConfig {
    std::vector<AggregationRecipe> recipes;
    std::vector<std::string> multi_vortex_patterns;
    std::map<int, double> impervious_medians;      // developed class -> median % impervious
    std::map<int, std::string> land_cover_classes;  // retained class -> variable name
    std::vector<int> excluded_land_classes;
    std::vector<int> wooded_classes;

    // All raw regional columns the recipes read.
    std::vector<std::string> regional_inputs() const;
    // Throws InvalidArgument when a recipe references a column not in `columns`.
    void validate_against(const std::vector<std::string>& columns) const;
};

FeatureConfig default_feature_config();
FeatureConfig feature_config_from_json(const std::string& text);
std::string feature_config_to_json(const FeatureConfig& config);
FeatureConfig read_feature_config(const std::filesystem::path& path);

// Case-insensitive substring match against any pattern.
bool multi_vortex_flag(const std::string& narrative,
                       const std::vector<std::string>& patterns = default_feature_config().multi_vortex_patterns);

// Evaluates recipes over weighted regional raw values. Outputs are NaN when an
// input is missing or a ratio denominator is zero.
NaturalRecord apply_recipes(const std::map<std::string, double>& raw, const std::vector<AggregationRecipe>& recipes);

// Storm-report variables: duration, coordinates, length, width, area,
// multi-vortex indicator, begin time (minutes), year, day of year.
NaturalRecord derive_storm_features(const TornadoEvent& event, const FeatureConfig& config);

// Land-cover proportions by variable name plus the developed-intensity,
// wooded and interaction composites.
NaturalRecord derive_land_features(const std::map<int, double>& proportions, const FeatureConfig& config);

// Mixed storm/regional variables; currently the total income estimate.
void derive_mixed_features(NaturalRecord& record);

NaturalRecord derive_event_features(const TornadoEvent& event, const std::map<int, double>& land_proportions,
                                    const std::map<std::string, double>& regional_raw, const FeatureConfig& config);

// ---------------------------------------------------------------------------
// Variable roster

enum class Source { StormEvents, NLCD, ACS, Mixed };

// Role decides scenario imputation and variable-set membership.
enum class Role {
    Location,   // knowable from the location alone
    Storm,      // storm characteristic; imputed at the training mean
    EventTime,  // time-of-day splines
    EventDate,  // year and day-of-year
    Mixed,      // location x storm
};

struct VariableDescriptor {
    std::string name;
    std::string label;
    Source source = Source::StormEvents;
    Role role = Role::Storm;
    TransformKind transform = TransformKind::Standardize;
    std::optional<SplineBasisSpec> spline;
    std::string unit;
};

std::vector<VariableDescriptor> default_roster();
std::vector<VariableDescriptor> roster_from_json(const std::string& text);
std::string roster_to_json(const std::vector<VariableDescriptor>& roster);

std::string to_string(Source s);
Source source_from_string(const std::string& s);  // throws UnknownSourceTag
std::string to_string(Role r);
Role role_from_string(const std::string& s);

}  // namespace zinn
