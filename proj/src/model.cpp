#include "model.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "error.hpp"

namespace zinn {

bool classify(double p, double threshold) { return p >= threshold; }

DamagePrediction combine_prediction(double p_damage, double conditional_transformed, const TransformSpec& outcome) {
    DamagePrediction d;
    d.p_damage = p_damage;
    d.conditional_transformed = conditional_transformed;
    const double usd = invert_transform(outcome, conditional_transformed);
    d.floored = usd < 0.0;
    d.conditional_usd = d.floored ? 0.0 : usd;
    d.expected_usd = p_damage * d.conditional_usd;
    d.damage_flag = classify(p_damage);
    return d;
}

void ZeroInflatedModel::validate() const {
    classifier_spec.validate();
    conditional_spec.validate();
    if (classifier_spec.input != columns.size() || conditional_spec.input != columns.size()) {
        fail(ErrorCode::InvalidArgument, "network input widths do not match the column roster");
    }
    if (classifier_spec.output_activation != Activation::Logistic) {
        fail(ErrorCode::InvalidArgument, "classifier needs a logistic output");
    }
    if (conditional_spec.output_activation != Activation::Identity) {
        fail(ErrorCode::InvalidArgument, "conditional model needs an identity output");
    }
    if (outcome.kind != TransformKind::Log1pStandardize) {
        fail(ErrorCode::InvalidArgument, "outcome transform must be log1p-standardize");
    }
    if (classifier.values.size() != classifier_spec.parameter_count() ||
        conditional.values.size() != conditional_spec.parameter_count()) {
        fail(ErrorCode::InvalidArgument, "parameter vectors do not match network specs");
    }
}

DamagePrediction predict(const ZeroInflatedModel& model, std::span<const double> features) {
    if (features.size() != model.input_width()) {
        fail(ErrorCode::RosterMismatch, "feature vector has " + std::to_string(features.size()) +
                                            " values, model expects " + std::to_string(model.input_width()));
    }
    const double p = predict(model.classifier, model.classifier_spec, features);
    const double c = predict(model.conditional, model.conditional_spec, features);
    return combine_prediction(p, c, model.outcome);
}

// ---------------------------------------------------------------------------

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd to_eigen(const Matrix& m, bool intercept) {
    const auto off = intercept ? 1 : 0;
    MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols() + off));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (intercept) out(static_cast<Eigen::Index>(r), 0) = 1.0;
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c + off)) = m(r, c);
        }
    }
    return out;
}

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double sigmoid(double z) { return activate(Activation::Logistic, z); }

double mean_bce(const MatrixXd& x, const VectorXd& y, const VectorXd& beta) {
    const VectorXd eta = x * beta;
    double s = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        // log(1 + e^eta) - y eta, computed stably
        const double e = eta(i);
        const double softplus = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        s += softplus - y(i) * e;
    }
    return s / static_cast<double>(eta.size());
}

OlsFit ols_eigen(const MatrixXd& x, const VectorXd& y) {
    const auto n = x.rows();
    const auto k = x.cols();
    if (n <= k) fail(ErrorCode::RankDeficient, "need more rows than coefficients");
    Eigen::ColPivHouseholderQR<MatrixXd> qr(x);
    if (qr.rank() < k) fail(ErrorCode::RankDeficient, "design matrix has rank " + std::to_string(qr.rank()) +
                                                          " < " + std::to_string(k));
    const VectorXd beta = qr.solve(y);
    const VectorXd resid = y - x * beta;
    OlsFit fit;
    fit.coefficients = to_std(beta);
    fit.residual_sd = std::sqrt(resid.squaredNorm() / static_cast<double>(n - k));
    // (X'X)^-1 = P R^-1 R^-T P'
    const MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const MatrixXd rinv = r.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(k, k));
    const MatrixXd cov_perm = rinv * rinv.transpose();
    const MatrixXd cov = qr.colsPermutation() * cov_perm * qr.colsPermutation().transpose();
    fit.standard_errors.resize(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
        fit.standard_errors[static_cast<std::size_t>(j)] = fit.residual_sd * std::sqrt(cov(j, j));
    }
    return fit;
}

}  // namespace

OlsFit ols_fit(const Matrix& design, std::span<const double> y) {
    if (design.rows() != y.size()) fail(ErrorCode::ShapeMismatch, "design rows and outcome length differ");
    const VectorXd yv = Eigen::Map<const VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    return ols_eigen(to_eigen(design, false), yv);
}

ZilnModel fit_ziln(const Matrix& x, std::span<const double> labels, std::span<const double> outcome,
                   const TransformSpec& outcome_spec) {
    if (x.rows() != labels.size() || x.rows() != outcome.size()) {
        fail(ErrorCode::ShapeMismatch, "feature rows, labels and outcomes differ in length");
    }
    const MatrixXd xa = to_eigen(x, true);
    const auto n = xa.rows();
    const auto k = xa.cols();
    VectorXd y(n);
    std::vector<std::size_t> positive;
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = labels[static_cast<std::size_t>(i)] > 0.5 ? 1.0 : 0.0;
        if (y(i) == 1.0) positive.push_back(static_cast<std::size_t>(i));
    }
    if (positive.empty()) fail(ErrorCode::InvalidArgument, "ZILN needs at least one positive-outcome row");

    ZilnModel model;
    model.outcome = outcome_spec;

    // Logistic part.
    if (positive.size() == static_cast<std::size_t>(n)) {
        model.logistic_degenerate = true;
        model.constant_probability = 1.0;
        model.logistic.assign(static_cast<std::size_t>(k), 0.0);
        model.logistic_se.assign(static_cast<std::size_t>(k), 0.0);
    } else {
        VectorXd beta = VectorXd::Zero(k);
        double obj = mean_bce(xa, y, beta);
        bool converged = false;
        int it = 0;
        MatrixXd h(k, k);
        for (; it < 100; ++it) {
            const VectorXd eta = xa * beta;
            VectorXd p(n), w(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                p(i) = sigmoid(eta(i));
                w(i) = p(i) * (1.0 - p(i));
            }
            const VectorXd g = xa.transpose() * (p - y) / static_cast<double>(n);
            if (g.cwiseAbs().maxCoeff() < 1e-8) {
                converged = true;
                break;
            }
            h = xa.transpose() * w.asDiagonal() * xa / static_cast<double>(n);
            const VectorXd step = h.ldlt().solve(g);
            double t = 1.0;
            VectorXd next = beta - step;
            double next_obj = mean_bce(xa, y, next);
            for (int halvings = 0; halvings < 40 && !(next_obj <= obj); ++halvings) {
                t *= 0.5;
                next = beta - t * step;
                next_obj = mean_bce(xa, y, next);
            }
            if (!(next_obj <= obj)) break;
            beta = next;
            obj = next_obj;
        }
        model.logistic_converged = converged;
        model.newton_iterations = it;
        model.logistic = to_std(beta);
        // Covariance from the Fisher information at the estimate.
        const VectorXd eta = xa * beta;
        VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = sigmoid(eta(i));
            w(i) = p * (1.0 - p);
        }
        const MatrixXd info = xa.transpose() * w.asDiagonal() * xa;
        const MatrixXd cov = info.ldlt().solve(MatrixXd::Identity(k, k));
        model.logistic_se.resize(static_cast<std::size_t>(k));
        for (Eigen::Index j = 0; j < k; ++j) model.logistic_se[static_cast<std::size_t>(j)] = std::sqrt(cov(j, j));
    }

    // Linear part on positive rows.
    MatrixXd xp(static_cast<Eigen::Index>(positive.size()), k);
    VectorXd yp(static_cast<Eigen::Index>(positive.size()));
    for (std::size_t i = 0; i < positive.size(); ++i) {
        xp.row(static_cast<Eigen::Index>(i)) = xa.row(static_cast<Eigen::Index>(positive[i]));
        yp(static_cast<Eigen::Index>(i)) = outcome[positive[i]];
    }
    const auto ols = ols_eigen(xp, yp);
    model.linear = ols.coefficients;
    model.linear_se = ols.standard_errors;
    model.residual_sd = ols.residual_sd;
    return model;
}

DamagePrediction predict_ziln(const ZilnModel& model, std::span<const double> features) {
    if (features.size() + 1 != model.linear.size()) {
        fail(ErrorCode::RosterMismatch, "feature vector has " + std::to_string(features.size()) +
                                            " values, model expects " + std::to_string(model.linear.size() - 1));
    }
    double eta = model.logistic[0];
    double lin = model.linear[0];
    for (std::size_t j = 0; j < features.size(); ++j) {
        eta += model.logistic[j + 1] * features[j];
        lin += model.linear[j + 1] * features[j];
    }
    const double p = model.logistic_degenerate ? model.constant_probability : sigmoid(eta);
    return combine_prediction(p, lin, model.outcome);
}

}  // namespace zinn
