#include "metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "error.hpp"

namespace zinn {

namespace {

void check_lengths(std::size_t a, std::size_t b, std::size_t min_n) {
    if (a != b) fail(ErrorCode::ShapeMismatch, "prediction and truth lengths differ");
    if (a < min_n) fail(ErrorCode::InvalidArgument, "need at least " + std::to_string(min_n) + " values");
}

}  // namespace

double mse(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred.size(), truth.size(), 2);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    return s / static_cast<double>(pred.size());
}

double r2(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred.size(), truth.size(), 2);
    const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
    double sse = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sse += (pred[i] - truth[i]) * (pred[i] - truth[i]);
        sst += (truth[i] - mean) * (truth[i] - mean);
    }
    if (sst == 0.0) fail(ErrorCode::ZeroVariance, "r2 undefined for constant truth");
    return 1.0 - sse / sst;
}

double accuracy(std::span<const double> probs, std::span<const double> labels, double threshold) {
    check_lengths(probs.size(), labels.size(), 1);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const bool predicted = probs[i] >= threshold;
        if (predicted == (labels[i] > 0.5)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(probs.size());
}

double auroc(std::span<const double> scores, std::span<const double> labels) {
    check_lengths(scores.size(), labels.size(), 1);
    const auto n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

    // Doubled midranks keep the rank sum integral.
    std::int64_t rank_sum_x2 = 0;
    std::int64_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const auto doubled = static_cast<std::int64_t>(i + 1 + j);  // 2 * average of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] > 0.5) {
                rank_sum_x2 += doubled;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
    if (n_pos == 0 || n_neg == 0) fail(ErrorCode::OneClassOnly, "auroc needs both classes");
    const std::int64_t u_x2 = rank_sum_x2 - n_pos * (n_pos + 1);
    return static_cast<double>(u_x2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::string to_string(Scope s) {
    switch (s) {
        case Scope::Train: return "train";
        case Scope::CV: return "cv";
        case Scope::Test: return "test";
        case Scope::All: return "all";
    }
    return "test";
}

MetricReport regression_report(Scope scope, std::span<const double> pred, std::span<const double> truth) {
    MetricReport r;
    r.scope = scope;
    r.n = pred.size();
    r.mse = mse(pred, truth);
    r.r2 = r2(pred, truth);
    return r;
}

MetricReport classifier_report(Scope scope, std::span<const double> probs, std::span<const double> labels) {
    MetricReport r;
    r.scope = scope;
    r.n = probs.size();
    r.accuracy = accuracy(probs, labels);
    r.auroc = auroc(probs, labels);
    return r;
}

}  // namespace zinn
