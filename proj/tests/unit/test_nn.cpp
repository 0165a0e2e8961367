#include <catch_amalgamated.hpp>

#include <cmath>

#include "check.hpp"
#include "nn.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace zinn;
using zinn::testing::error_code;

TEST_CASE("analytic gradients match central differences", "[nn]") {
    int bce = 0, elu = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto c = zinn::testing::gradient_case(seed);
        INFO("seed " << seed << " " << c.spec.architecture() << " worst " << c.worst);
        CHECK(c.passed());
        bce += c.loss == LossKind::BinaryCrossEntropy;
        elu += c.spec.hidden_activation == Activation::ELU;
    }
    CHECK(bce > 0);
    CHECK(elu > 0);
}

TEST_CASE("activations", "[nn]") {
    CHECK(activate(Activation::ReLU, -2.0) == 0.0);
    CHECK(activate(Activation::ReLU, 3.0) == 3.0);
    for (double x : {0.0, 0.5, 10.0}) CHECK(activate(Activation::ELU, x) == x);
    CHECK(activate(Activation::ELU, -50.0) == Catch::Approx(-1.0).margin(1e-15));
    CHECK(activate(Activation::ELU, -1.0) == Catch::Approx(std::exp(-1.0) - 1.0));
    CHECK(activate(Activation::Logistic, 0.0) == 0.5);
    CHECK(activate(Activation::Logistic, 800.0) == 1.0);
    CHECK(activate(Activation::Logistic, -800.0) >= 0.0);
    CHECK(activation_from_string("elu") == Activation::ELU);
    // Derivatives against central differences away from the ReLU kink.
    for (auto a : {Activation::ReLU, Activation::ELU, Activation::Logistic, Activation::Identity}) {
        for (double z : {-2.0, -0.3, 0.4, 1.7}) {
            const double num = (activate(a, z + 1e-6) - activate(a, z - 1e-6)) / 2e-6;
            CHECK(activate_grad(a, z) == Catch::Approx(num).margin(1e-8));
        }
    }
}

TEST_CASE("losses", "[nn]") {
    CHECK(loss_value(LossKind::MseTransformed, 3.0, 1.0) == 4.0);
    CHECK(loss_grad(LossKind::MseTransformed, 3.0, 1.0) == 4.0);
    CHECK(loss_value(LossKind::BinaryCrossEntropy, 0.8, 1.0) == Catch::Approx(-std::log(0.8)));
    bool clamped = false;
    const double v = loss_value(LossKind::BinaryCrossEntropy, 0.0, 1.0, &clamped);
    CHECK(clamped);
    CHECK(v == Catch::Approx(-std::log(kBceEpsilon)));
}

TEST_CASE("inverted dropout preserves the expected output", "[nn]") {
    // Exact when everything after the dropped units is linear, i.e. a single
    // hidden layer feeding an identity output.
    for (auto [hidden, act] : {std::pair{std::vector<std::size_t>{8}, Activation::ReLU},
                               std::pair{std::vector<std::size_t>{12}, Activation::ELU}}) {
        NetworkSpec spec;
        spec.input = 3;
        spec.hidden = hidden;
        spec.hidden_activation = act;
        spec.dropout = 0.3;
        const auto params = init_params(spec, 4);
        const std::vector<double> x{0.4, -1.2, 0.7};
        const double eval = predict(params, spec, x);
        Rng rng(12);
        ForwardCache cache;
        double sum = 0, ss = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const double o = forward(params, spec, x, Mode::Train, &rng, cache);
            sum += o;
            ss += o * o;
        }
        const double mean = sum / n;
        const double se = std::sqrt((ss / n - mean * mean) / n);
        INFO(spec.architecture() << " mean " << mean << " eval " << eval << " se " << se);
        CHECK(std::abs(mean - eval) <= 3 * se);
    }
}

TEST_CASE("AdaGrad accumulators never decrease", "[nn]") {
    auto state = make_optimizer(OptimizerKind::AdaGrad, 5, 0.1);
    std::vector<double> params(5, 0.0);
    Rng rng(1);
    auto prev = state.first;
    for (int step = 0; step < 200; ++step) {
        std::vector<double> g(5);
        for (auto& v : g) v = rng.uniform() < 0.3 ? 0.0 : rng.normal();
        adagrad_step(state, params, g);
        for (std::size_t k = 0; k < 5; ++k) REQUIRE(state.first[k] >= prev[k]);
        prev = state.first;
    }
    // One hand step: G = g^2, w -= lr g / sqrt(G + eps).
    auto s = make_optimizer(OptimizerKind::AdaGrad, 1, 0.5);
    std::vector<double> w{1.0};
    const std::vector<double> g{2.0};
    adagrad_step(s, w, g);
    CHECK(w[0] == Catch::Approx(1.0 - 0.5 * 2.0 / std::sqrt(4.0 + s.epsilon)));
}

TEST_CASE("training is bit-reproducible and reduces the loss", "[nn]") {
    NetworkSpec spec;
    spec.input = 2;
    spec.hidden = {8};
    spec.dropout = 0.1;
    Rng rng(3);
    Matrix x(300, 2);
    std::vector<double> y(300);
    for (std::size_t i = 0; i < 300; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        y[i] = x(i, 0) - 0.5 * x(i, 1) * x(i, 1);
    }
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.learning_rate = 0.05;
    cfg.seed = 9;
    const auto a = train(spec, init_params(spec, 1), x, y, cfg);
    const auto b = train(spec, init_params(spec, 1), x, y, cfg);
    CHECK(a.params == b.params);
    CHECK(a.history == b.history);
    CHECK(a.history.back() < 0.5 * a.history.front());
    cfg.seed = 10;
    CHECK_FALSE(train(spec, init_params(spec, 1), x, y, cfg).params == a.params);
}

TEST_CASE("non-finite loss is reported", "[nn]") {
    NetworkSpec spec;
    spec.input = 1;
    spec.hidden = {2};
    Matrix x(4, 1);
    std::vector<double> y{1.0, 2.0, std::nan(""), 4.0};
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 2;
    cfg.shuffle = false;
    CHECK(error_code([&] { (void)train(spec, init_params(spec, 1), x, y, cfg); }) == ErrorCode::NonFiniteLoss);
}

TEST_CASE("parameter layout", "[nn]") {
    NetworkSpec spec;
    spec.input = 9;
    spec.hidden = {6, 4};
    CHECK(spec.parameter_count() == 9 * 6 + 6 + 6 * 4 + 4 + 4 + 1);
    CHECK(spec.architecture() == "relu[6,4]");
    const auto p = init_params(spec, 2);
    CHECK(p.values.size() == spec.parameter_count());
    const auto off = layer_offsets(spec);
    CHECK(off[1].weights == 60);
    const double bound = std::sqrt(6.0 / 9.0);
    for (std::size_t k = 0; k < 54; ++k) CHECK(std::abs(p.values[k]) <= bound);
    for (std::size_t k = 54; k < 60; ++k) CHECK(p.values[k] == 0.0);
    NetworkSpec bad;
    bad.dropout = 1.0;
    CHECK(error_code([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("architecture families", "[nn]") {
    using A = std::vector<std::vector<std::size_t>>;
    CHECK(descending_architectures(9) == A{{6}, {6, 4}});
    CHECK(descending_architectures(100) == A{{67},
                                             {67, 45},
                                             {67, 45, 30},
                                             {67, 45, 30, 20},
                                             {67, 45, 30, 20, 13},
                                             {67, 45, 30, 20, 13, 9},
                                             {67, 45, 30, 20, 13, 9, 6},
                                             {67, 45, 30, 20, 13, 9, 6, 4}});
    CHECK(descending_architectures(3) == A{{4}});
    for (std::size_t n = 1; n <= 300; ++n) REQUIRE(zinn::testing::descending_rule_holds(n));
    const std::vector<std::size_t> widths{100, 32};
    CHECK(wide_architectures(widths) == A{{100, 100}, {32, 32}});
    const std::vector<std::size_t> depths{2, 3};
    CHECK(deep_architectures(67, depths) == A{{33, 33}, {33, 33, 33}});
}
