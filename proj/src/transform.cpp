#include "transform.hpp"

#include <cmath>

#include "error.hpp"

namespace zinn {

namespace {

void check_domain(TransformKind kind, double x) {
    if (kind == TransformKind::Log1pStandardize || kind == TransformKind::Log1000Standardize) {
        if (!(x >= 0.0)) {
            fail(ErrorCode::NegativeInput,
                 "log transform requires x >= 0, got " + std::to_string(x));
        }
    }
}

}  // namespace

double intermediate(TransformKind kind, double x) {
    check_domain(kind, x);
    switch (kind) {
        case TransformKind::Identity:
        case TransformKind::Standardize: return x;
        case TransformKind::Log1pStandardize: return std::log1p(x);
        case TransformKind::Log1000Standardize: return std::log1p(1000.0 * x);
    }
    return x;
}

double from_intermediate(TransformKind kind, double u) {
    switch (kind) {
        case TransformKind::Identity:
        case TransformKind::Standardize: return u;
        case TransformKind::Log1pStandardize: return std::expm1(u);
        case TransformKind::Log1000Standardize: return std::expm1(u) / 1000.0;
    }
    return u;
}

TransformSpec fit_transform(TransformKind kind, std::span<const double> values) {
    if (kind == TransformKind::Identity) return TransformSpec{};
    if (values.size() < 2) {
        fail(ErrorCode::DegenerateColumn, "need at least two values to fit a transform");
    }
    // Two-pass mean/variance on the intermediate scale.
    double sum = 0.0;
    for (double x : values) sum += intermediate(kind, x);
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double x : values) {
        const double d = intermediate(kind, x) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    if (!(sd > 0.0) || !std::isfinite(sd)) {
        fail(ErrorCode::DegenerateColumn, "column has zero variance");
    }
    return TransformSpec{kind, mean, sd};
}

double apply_transform(const TransformSpec& spec, double x) {
    return (intermediate(spec.kind, x) - spec.mean) / spec.sd;
}

double invert_transform(const TransformSpec& spec, double z) {
    return from_intermediate(spec.kind, z * spec.sd + spec.mean);
}

std::string_view to_string(TransformKind kind) {
    switch (kind) {
        case TransformKind::Identity: return "identity";
        case TransformKind::Standardize: return "standardize";
        case TransformKind::Log1pStandardize: return "log1p_standardize";
        case TransformKind::Log1000Standardize: return "log1000_standardize";
    }
    return "identity";
}

TransformKind transform_kind_from_string(std::string_view name) {
    if (name == "identity" || name == "0") return TransformKind::Identity;
    if (name == "standardize" || name == "1") return TransformKind::Standardize;
    if (name == "log1p_standardize" || name == "2") return TransformKind::Log1pStandardize;
    if (name == "log1000_standardize" || name == "3") return TransformKind::Log1000Standardize;
    fail(ErrorCode::InvalidArgument, "unknown transform kind '" + std::string(name) + "'");
}

}  // namespace zinn
