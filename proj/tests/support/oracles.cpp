#include "oracles.hpp"

#include <chrono>
#include <cmath>

#include "metrics.hpp"
#include "model.hpp"
#include "protocol.hpp"
#include "rng.hpp"
#include "synthetic.hpp"

namespace zinn::testing {

namespace {

double objective(const NetworkParams& p, const NetworkSpec& spec, std::span<const double> x, double y, LossKind loss) {
    return loss_value(loss, predict(p, spec, x), y) + l2_penalty(p, spec);
}

}  // namespace

GradientCase gradient_case(std::uint64_t seed) {
    Rng rng(seed);
    GradientCase c;
    c.spec.input = 1 + rng.below(6);
    const auto depth = 1 + rng.below(3);
    for (std::size_t l = 0; l < depth; ++l) c.spec.hidden.push_back(1 + rng.below(7));
    c.spec.hidden_activation = seed % 2 ? Activation::ELU : Activation::ReLU;
    c.loss = (seed / 2) % 2 ? LossKind::BinaryCrossEntropy : LossKind::MseTransformed;
    c.spec.output_activation = c.loss == LossKind::BinaryCrossEntropy ? Activation::Logistic : Activation::Identity;
    c.spec.l2 = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 0.1);

    auto params = init_params(c.spec, derive_seed(seed, 1));
    // Nonzero biases so the check also covers them.
    const auto offsets = layer_offsets(c.spec);
    for (std::size_t l = 0; l < offsets.size(); ++l)
        for (std::size_t k = 0; k < c.spec.fan_out(l); ++k) params.values[offsets[l].biases + k] = rng.uniform(-0.5, 0.5);

    std::vector<double> x(c.spec.input);
    for (auto& v : x) v = rng.uniform(-2.0, 2.0);
    const double y = c.loss == LossKind::BinaryCrossEntropy ? static_cast<double>(rng.below(2)) : rng.normal();

    ForwardCache cache;
    const double pred = forward(params, c.spec, x, Mode::Eval, nullptr, cache);
    std::vector<double> grads(params.values.size(), 0.0);
    backward(params, c.spec, cache, loss_grad(c.loss, pred, y), grads);

    const double h = 1e-6;
    for (std::size_t k = 0; k < params.values.size(); ++k) {
        auto plus = params, minus = params;
        plus.values[k] += h;
        minus.values[k] -= h;
        const double numeric = (objective(plus, c.spec, x, y, c.loss) - objective(minus, c.spec, x, y, c.loss)) / (2 * h);
        const double tol = std::max(1e-6, 1e-4 * std::max(std::abs(numeric), std::abs(grads[k])));
        c.worst = std::max(c.worst, std::abs(numeric - grads[k]) / tol);
    }
    return c;
}

double pairwise_auroc(std::span<const double> scores, std::span<const double> labels) {
    long long twice_wins = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] > 0.5) ++pos;
        else ++neg;
        if (labels[i] <= 0.5) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] > 0.5) continue;
            if (scores[i] > scores[j]) twice_wins += 2;
            else if (scores[i] == scores[j]) twice_wins += 1;
        }
    }
    return static_cast<double>(twice_wins) / static_cast<double>(2 * pos * neg);
}

double ziln_recovery_worst_z(std::uint64_t seed, std::size_t n, double sigma) {
    const auto s = make_ziln_sample(n, seed, sigma);
    const auto m = fit_ziln(s.x, s.labels, s.outcome);
    double worst = 0.0;
    for (std::size_t j = 0; j < s.logistic.size(); ++j) {
        worst = std::max(worst, std::abs(m.logistic[j] - s.logistic[j]) / m.logistic_se[j]);
        worst = std::max(worst, std::abs(m.linear[j] - s.linear[j]) / m.linear_se[j]);
    }
    return worst;
}

bool descending_rule_holds(std::size_t n) {
    const auto archs = descending_architectures(n);
    if (archs.empty()) return false;
    for (std::size_t a = 0; a < archs.size(); ++a) {
        const auto& h = archs[a];
        if (h.size() != a + 1) return false;
        if (a > 0 && !std::equal(archs[a - 1].begin(), archs[a - 1].end(), h.begin())) return false;
        std::size_t prev = n;
        for (auto w : h) {
            const auto step = static_cast<std::size_t>(std::llround(2.0 * static_cast<double>(prev) / 3.0));
            if (w < 4) return false;
            if (w != step && !(w == 4 && step < 4)) return false;
            prev = w;
        }
    }
    return archs.back().back() == 4;
}

EndToEnd zero_inflated_end_to_end(std::size_t n, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    const auto s = make_zi_table(n, seed);
    const auto sp = split(n, seed);

    ZiTrainOptions o;
    o.seed = seed;
    o.train.epochs = 100;
    o.train.learning_rate = 0.01;
    o.train.lr_decay = 0.97;
    o.train.optimizer = OptimizerKind::Adam;
    SweepOptions so;
    so.family = ArchitectureFamily::Wide;
    so.widths = {16, 32};
    so.l2s = {0.0, 1e-4};
    so.kind = ModelKind::Conditional;
    o.conditional = make_candidates(s.table, so);
    so.kind = ModelKind::Classifier;
    o.classifier = make_candidates(s.table, so);
    const auto r = train_zero_inflated(s.table, sp, o);

    EndToEnd e;
    e.test_mse = r.conditional.test.mse;
    e.noise_variance = s.noise_variance;
    e.test_auroc = r.classifier.test.auroc;
    std::vector<double> p, labels;
    for (auto i : sp.indices(Partition::Test)) {
        p.push_back(s.true_probability[i]);
        labels.push_back(s.table.outcome_raw[i] > 0.0 ? 1.0 : 0.0);
    }
    e.oracle_auroc = auroc(p, labels);
    e.conditional = r.conditional.winner().describe();
    e.classifier = r.classifier.winner().describe();
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return e;
}

}  // namespace zinn::testing
