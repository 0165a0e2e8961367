#pragma once

#include <span>
#include <vector>

#include "dataset.hpp"
#include "matrix.hpp"
#include "nn.hpp"
#include "transform.hpp"

namespace zinn {

struct DamagePrediction {
    double p_damage = 0.0;
    double conditional_transformed = 0.0;
    double conditional_usd = 0.0;  // inverse outcome transform, floored at 0
    double expected_usd = 0.0;     // p_damage * conditional_usd
    bool damage_flag = false;      // p_damage >= 0.5
    bool floored = false;          // the inverse transform came out negative
};

bool classify(double p, double threshold = 0.5);

// Dollar back-transform is the plain inverse of the outcome transform, with
// no log-normal mean correction.
DamagePrediction combine_prediction(double p_damage, double conditional_transformed, const TransformSpec& outcome);

// Classifier and conditional regressor over the same input columns.
struct ZeroInflatedModel {
    NetworkSpec classifier_spec;
    NetworkParams classifier;
    NetworkSpec conditional_spec;
    NetworkParams conditional;
    TransformSpec outcome;
    std::vector<ColumnDescriptor> columns;

    std::size_t input_width() const { return columns.size(); }
    // Throws InvalidArgument when the pieces disagree.
    void validate() const;
};

// Features already transformed, ordered like model.columns. Throws RosterMismatch.
DamagePrediction predict(const ZeroInflatedModel& model, std::span<const double> features);

// ---------------------------------------------------------------------------
// Zero-inflated log-normal baseline

struct OlsFit {
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
    double residual_sd = 0.0;  // n - k denominator
};

// Least squares on the given design (no intercept added). Throws RankDeficient.
OlsFit ols_fit(const Matrix& design, std::span<const double> y);

struct ZilnModel {
    // Index 0 is the intercept, then one coefficient per feature.
    std::vector<double> logistic;
    std::vector<double> logistic_se;
    std::vector<double> linear;
    std::vector<double> linear_se;
    double residual_sd = 0.0;
    TransformSpec outcome;

    // All rows shared one label: the logistic part is replaced by the
    // observed constant probability.
    bool logistic_degenerate = false;
    double constant_probability = 0.0;
    bool logistic_converged = true;  // false suggests separation
    int newton_iterations = 0;
};

// Logistic part on all rows against labels (1 = damage), by damped Newton;
// linear part by OLS on rows with label 1 against the transformed outcome.
ZilnModel fit_ziln(const Matrix& x, std::span<const double> labels, std::span<const double> outcome,
                   const TransformSpec& outcome_spec = {TransformKind::Log1pStandardize, 0.0, 1.0});

DamagePrediction predict_ziln(const ZilnModel& model, std::span<const double> features);

}  // namespace zinn
