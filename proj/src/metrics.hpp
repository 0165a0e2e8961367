#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace zinn {

// Mean squared error; lengths must match and be >= 2.
double mse(std::span<const double> pred, std::span<const double> truth);
// 1 - SSE/SST. Throws ZeroVariance when truth is constant.
double r2(std::span<const double> pred, std::span<const double> truth);
// Fraction of (p >= threshold) == label.
double accuracy(std::span<const double> probs, std::span<const double> labels, double threshold = 0.5);
// Mann-Whitney AUROC with midranks for ties. Throws OneClassOnly.
double auroc(std::span<const double> scores, std::span<const double> labels);

enum class Scope { Train, CV, Test, All };
std::string to_string(Scope s);

struct MetricReport {
    Scope scope = Scope::Test;
    std::size_t n = 0;
    // Conditional model metrics on the transformed scale.
    double mse = 0.0;
    double r2 = 0.0;
    // Classifier metrics.
    double accuracy = 0.0;
    double auroc = 0.0;
};

MetricReport regression_report(Scope scope, std::span<const double> pred, std::span<const double> truth);
MetricReport classifier_report(Scope scope, std::span<const double> probs, std::span<const double> labels);

}  // namespace zinn
