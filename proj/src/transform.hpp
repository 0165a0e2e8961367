#pragma once

#include <span>
#include <string>
#include <string_view>

namespace zinn {

// Column encodings applied before model fitting. Each standardizes on an
// intermediate scale: x, log(x + 1) or log(1000 x + 1). Identity passes the
// value through (used for the 0/1 multi-vortex indicator).
enum class TransformKind { Identity, Standardize, Log1pStandardize, Log1000Standardize };

struct TransformSpec {
    TransformKind kind = TransformKind::Identity;
    double mean = 0.0;  // on the intermediate scale
    double sd = 1.0;    // sample sd (n - 1), same scale

    bool operator==(const TransformSpec&) const = default;
};

// Value on the kind's intermediate scale; throws NegativeInput for log kinds.
double intermediate(TransformKind kind, double x);
double from_intermediate(TransformKind kind, double u);

// Throws DegenerateColumn (sd == 0, or fewer than two values) and
// NegativeInput for log kinds on negative data.
TransformSpec fit_transform(TransformKind kind, std::span<const double> values);

double apply_transform(const TransformSpec& spec, double x);
double invert_transform(const TransformSpec& spec, double z);

std::string_view to_string(TransformKind kind);
TransformKind transform_kind_from_string(std::string_view name);

}  // namespace zinn
