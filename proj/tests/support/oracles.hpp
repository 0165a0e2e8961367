#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nn.hpp"

namespace zinn::testing {

// One randomized network / loss / activation case: analytic gradient of the
// per-sample objective against central differences.
struct GradientCase {
    NetworkSpec spec;
    LossKind loss = LossKind::MseTransformed;
    // max over parameters of |analytic - numeric| / max(1e-6, 1e-4 * max(|analytic|, |numeric|))
    double worst = 0.0;
    bool passed() const { return worst <= 1.0; }
};

GradientCase gradient_case(std::uint64_t seed);

// O(n^2) Mann-Whitney over all positive/negative pairs, ties counting 1/2,
// in exact integer arithmetic until the final division.
double pairwise_auroc(std::span<const double> scores, std::span<const double> labels);

// Generate-then-fit check for the zero-inflated log-normal baseline: largest
// |estimate - truth| / standard error over every coefficient.
double ziln_recovery_worst_z(std::uint64_t seed, std::size_t n = 5000, double sigma = 0.3);

// Descending-architecture rule as stated: widths >= 4, each step
// round(2/3 previous) or raised to 4, chains ending at 4, prefixes in order.
bool descending_rule_holds(std::size_t n_inputs);

// Full protocol on a known zero-inflated process.
struct EndToEnd {
    double test_mse = 0.0;
    double noise_variance = 0.0;
    double test_auroc = 0.0;
    double oracle_auroc = 0.0;
    double seconds = 0.0;
    std::string conditional;
    std::string classifier;
};

EndToEnd zero_inflated_end_to_end(std::size_t n, std::uint64_t seed);

}  // namespace zinn::testing
