#include <catch_amalgamated.hpp>

#include <cmath>

#include "check.hpp"
#include "metrics.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace zinn;
using zinn::testing::error_code;

TEST_CASE("rank AUROC equals the pairwise oracle", "[metrics]") {
    Rng rng(21);
    for (int d = 0; d < 100; ++d) {
        const std::size_t n = 2 + rng.below(199);
        std::vector<double> s(n), l(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Few distinct scores so ties are common.
            s[i] = static_cast<double>(rng.below(d % 3 == 0 ? 5 : 40)) / 7.0;
            l[i] = rng.uniform() < 0.4 ? 1.0 : 0.0;
        }
        l[0] = 1.0;
        l[1] = 0.0;
        REQUIRE(std::abs(auroc(s, l) - zinn::testing::pairwise_auroc(s, l)) <= 1e-12);
    }
}

TEST_CASE("AUROC symmetry and invariance", "[metrics]") {
    Rng rng(4);
    for (int d = 0; d < 20; ++d) {
        std::vector<double> s(150), neg(150), warped(150), l(150);
        for (std::size_t i = 0; i < s.size(); ++i) {
            s[i] = rng.normal();
            l[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
            neg[i] = -s[i];
            warped[i] = std::exp(3.0 * s[i]) + 7.0;
        }
        l[0] = 1.0;
        l[1] = 0.0;
        CHECK(auroc(s, l) == Catch::Approx(1.0 - auroc(neg, l)).margin(1e-12));
        CHECK(auroc(s, l) == auroc(warped, l));
    }
    const std::vector<double> s{0.1, 0.2}, one{1.0, 1.0};
    CHECK(error_code([&] { (void)auroc(s, one); }) == ErrorCode::OneClassOnly);
}

TEST_CASE("hand-computed metrics", "[metrics]") {
    // 3-row case: pred 1, 2, 3 vs truth 1, 3, 2.
    const std::vector<double> pred{1, 2, 3}, truth{1, 3, 2};
    CHECK(mse(pred, truth) == Catch::Approx(2.0 / 3.0));
    CHECK(r2(pred, truth) == Catch::Approx(1.0 - 2.0 / 2.0));
    const std::vector<double> p{0.5, 0.4999, 0.9, 0.1}, lab{1, 0, 0, 0};
    CHECK(accuracy(p, lab) == 0.75);
    CHECK(accuracy(p, lab, 0.7) == 0.5);
    const std::vector<double> flat{2, 2, 2};
    CHECK(error_code([&] { (void)r2(pred, flat); }) == ErrorCode::ZeroVariance);
    const std::vector<double> one{1};
    CHECK(error_code([&] { (void)mse(one, one); }) == ErrorCode::InvalidArgument);
    // Scores 0.9, 0.4 positive; 0.4, 0.1 negative: pairs (0.9>0.4, 0.9>0.1, tie, 0.4>0.1) = 3.5 / 4.
    const std::vector<double> sc{0.9, 0.4, 0.4, 0.1}, lb{1, 1, 0, 0};
    CHECK(auroc(sc, lb) == 0.875);
}

TEST_CASE("accuracy and error rate sum to one", "[metrics]") {
    Rng rng(8);
    std::vector<double> p(500), l(500);
    for (std::size_t i = 0; i < 500; ++i) {
        p[i] = rng.uniform();
        l[i] = rng.uniform() < 0.3 ? 1.0 : 0.0;
    }
    double errors = 0;
    for (std::size_t i = 0; i < 500; ++i) errors += (p[i] >= 0.5) != (l[i] > 0.5);
    CHECK(accuracy(p, l) + errors / 500.0 == Catch::Approx(1.0));
}

TEST_CASE("metric reports", "[metrics]") {
    const std::vector<double> pred{1, 2, 3, 4}, truth{1, 2, 3, 5};
    const auto r = regression_report(Scope::Test, pred, truth);
    CHECK(r.n == 4);
    CHECK(r.mse == 0.25);
    const std::vector<double> p{0.9, 0.2, 0.6, 0.3}, lab{1, 0, 0, 1};
    const auto c = classifier_report(Scope::CV, p, lab);
    CHECK(c.accuracy == 0.5);
    CHECK(c.auroc == 0.75);
    CHECK(to_string(Scope::CV) == "cv");
}
