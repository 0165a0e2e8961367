#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "check.hpp"
#include "protocol.hpp"
#include "synthetic.hpp"

using namespace zinn;
using zinn::testing::error_code;

namespace {

ProtocolOptions quick_options(std::uint64_t seed) {
    ProtocolOptions o;
    o.seed = seed;
    o.train.epochs = 15;
    o.train.learning_rate = 0.05;
    return o;
}

std::vector<Candidate> candidates(const FeatureTable& t, ModelKind kind) {
    SweepOptions so;
    so.kind = kind;
    so.family = ArchitectureFamily::Wide;
    so.widths = {4, 8};
    so.dropouts = {0.0, 0.1};
    return make_candidates(t, so);
}

}  // namespace

TEST_CASE("grids", "[protocol]") {
    const auto g = parse_grid("0.1:0.9:0.1");
    REQUIRE(g.size() == 9);
    CHECK(g.front() == 0.1);
    CHECK(g[2] == 0.3);
    CHECK(g.back() == 0.9);
    CHECK(parse_grid("0.2") == std::vector<double>{0.2});
    CHECK(parse_grid("0:0.001:0.0005").size() == 3);
    CHECK(error_code([] { (void)parse_grid("0.9:0.1:0.1"); }) == ErrorCode::InvalidArgument);
    CHECK(error_code([] { (void)parse_grid("0:1:0"); }) == ErrorCode::InvalidArgument);
    CHECK(error_code([] { (void)parse_grid("a:b:c"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("candidate enumeration", "[protocol]") {
    const auto s = zinn::testing::make_zi_table(50, 1, {.features = 9});
    SweepOptions so;
    so.dropouts = parse_grid("0.1:0.9:0.1");
    so.l2s = {0.0, 0.01};
    const auto c = make_candidates(s.table, so);
    CHECK(c.size() == 2 * 9 * 2);
    CHECK(c[0].describe() == "combined|relu[6]|dropout=0.1|l2=0");
    CHECK(c[0].spec.input == 9);
    so.kind = ModelKind::Classifier;
    so.family = ArchitectureFamily::Deep;
    so.activation = Activation::ELU;
    so.dropouts = {0.0};
    so.l2s = {0.0};
    const auto d = make_candidates(s.table, so);
    REQUIRE(d.size() == 2);
    CHECK(d[1].spec.hidden == std::vector<std::size_t>{4, 4, 4});
    CHECK(d[1].spec.output_activation == Activation::Logistic);
    CHECK(d[1].spec.hidden_activation == Activation::ELU);
}

TEST_CASE("selection rule and tie-breaks", "[protocol]") {
    auto result = [](std::vector<std::size_t> hidden, double mse, double auc, bool failed = false) {
        CandidateResult r;
        r.candidate.variable_set = "combined";
        r.candidate.spec.input = 5;
        r.candidate.spec.hidden = std::move(hidden);
        r.parameters = r.candidate.spec.parameter_count();
        r.cv.mse = mse;
        r.cv.auroc = auc;
        r.failed = failed;
        return r;
    };
    std::vector<CandidateResult> rs{result({8}, 0.5, 0.7), result({4}, 0.5, 0.7), result({6}, 0.4, 0.6, true),
                                    result({16}, 0.6, 0.8)};
    CHECK(select_best(ModelKind::Conditional, rs) == 1);  // tie on MSE, fewer parameters
    CHECK(select_best(ModelKind::Classifier, rs) == 3);
    for (auto& r : rs) r.failed = true;
    CHECK(error_code([&] { (void)select_best(ModelKind::Conditional, rs); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("conditional models train on damaged rows only", "[protocol]") {
    const auto s = zinn::testing::make_zi_table(400, 2);
    const auto sp = split(400, 2);
    for (auto p : {Partition::Train, Partition::CrossValidation, Partition::Test}) {
        for (auto i : usable_rows(s.table, sp, p, ModelKind::Conditional)) REQUIRE(s.table.outcome_raw[i] > 0.0);
        CHECK(usable_rows(s.table, sp, p, ModelKind::Classifier).size() == sp.indices(p).size());
    }
    const std::vector<std::size_t> rows{0, 1, 2};
    const auto y = targets(s.table, rows, ModelKind::Classifier);
    for (std::size_t k = 0; k < 3; ++k) CHECK(y[k] == (s.table.outcome_raw[k] > 0 ? 1.0 : 0.0));
}

TEST_CASE("protocol is deterministic per seed", "[protocol]") {
    const auto s = zinn::testing::make_zi_table(500, 3);
    const auto sp = split(500, 3);
    for (auto kind : {ModelKind::Conditional, ModelKind::Classifier}) {
        const auto cands = candidates(s.table, kind);
        const auto a = run_protocol(s.table, sp, kind, cands, quick_options(5));
        const auto b = run_protocol(s.table, sp, kind, cands, quick_options(5));
        CHECK(a.best == b.best);
        CHECK(a.retrained == b.retrained);
        CHECK(a.final_params == b.final_params);
        CHECK(a.test.mse == b.test.mse);
        CHECK(a.test.auroc == b.test.auroc);
        CHECK(a.candidates.size() == cands.size());
        const auto c = run_protocol(s.table, sp, kind, cands, quick_options(6));
        CHECK_FALSE(c.final_params == a.final_params);
        if (kind == ModelKind::Conditional) {
            CHECK(a.test.n == usable_rows(s.table, sp, Partition::Test, kind).size());
            CHECK(a.residuals.size() == a.test.n);
            for (const auto& r : a.residuals) CHECK(r.value >= 0.0);
        }
    }
}

TEST_CASE("selection never reads the test partition", "[protocol]") {
    const auto s = zinn::testing::make_zi_table(500, 4);
    const auto sp = split(500, 4);
    auto poisoned = s.table;
    for (auto i : sp.indices(Partition::Test)) {
        poisoned.outcome[i] = std::nan("");
        for (std::size_t j = 0; j < poisoned.columns.size(); ++j) poisoned.x(i, j) = std::nan("");
    }
    for (auto kind : {ModelKind::Conditional, ModelKind::Classifier}) {
        const auto cands = candidates(s.table, kind);
        const auto clean = evaluate_candidates(s.table, sp, kind, cands, quick_options(1));
        const auto dirty = evaluate_candidates(poisoned, sp, kind, cands, quick_options(1));
        REQUIRE(clean.size() == dirty.size());
        for (std::size_t k = 0; k < clean.size(); ++k) {
            CHECK_FALSE(dirty[k].failed);
            CHECK(clean[k].cv.mse == dirty[k].cv.mse);
            CHECK(clean[k].cv.auroc == dirty[k].cv.auroc);
        }
        CHECK(select_best(kind, clean) == select_best(kind, dirty));
        // The full protocol reports the same selection as the two steps.
        const auto full = run_protocol(s.table, sp, kind, cands, quick_options(1));
        CHECK(full.best == select_best(kind, clean));
        CHECK(full.candidates[full.best].cv.mse == clean[full.best].cv.mse);
    }
}

TEST_CASE("zero-inflated training and evaluation", "[protocol]") {
    const auto s = zinn::testing::make_zi_table(600, 5);
    const auto sp = split(600, 5);
    ZiTrainOptions o;
    o.seed = 2;
    o.train.epochs = 10;
    o.conditional = candidates(s.table, ModelKind::Conditional);
    o.classifier = candidates(s.table, ModelKind::Classifier);
    const auto r = train_zero_inflated(s.table, sp, o);
    r.model.validate();
    CHECK(r.model.columns.size() == s.table.columns.size());
    CHECK(r.model.classifier_spec == r.classifier.winner().spec);
    CHECK(r.model.classifier == r.classifier.final_params);
    CHECK(r.ziln.linear.size() == s.table.columns.size() + 1);
    CHECK(r.ziln_classifier_test.n == sp.indices(Partition::Test).size());

    const auto test_rows = sp.indices(Partition::Test);
    const auto e = evaluate_model(r.model, s.table, test_rows, Scope::Test);
    CHECK(e.classifier.n == test_rows.size());
    CHECK(e.conditional.n == usable_rows(s.table, sp, Partition::Test, ModelKind::Conditional).size());
    const auto all = evaluate_model(r.model, s.table, {}, Scope::All);
    CHECK(all.classifier.n == 600);

    // Columns are matched by name, so a reordered table scores the same.
    auto shuffled = s.table;
    std::reverse(shuffled.columns.begin(), shuffled.columns.end());
    for (std::size_t i = 0; i < 600; ++i)
        for (std::size_t j = 0; j < shuffled.columns.size(); ++j)
            shuffled.x(i, j) = s.table.x(i, shuffled.columns.size() - 1 - j);
    CHECK(evaluate_model(r.model, shuffled, {}, Scope::All).conditional.mse == all.conditional.mse);
    auto missing = s.table;
    missing.columns[0].name = "renamed";
    CHECK(error_code([&] { (void)evaluate_model(r.model, missing, {}, Scope::All); }) == ErrorCode::RosterMismatch);
}

TEST_CASE("sweep and residual files", "[protocol]") {
    const auto s = zinn::testing::make_zi_table(300, 6);
    const auto sp = split(300, 6);
    const auto cands = candidates(s.table, ModelKind::Classifier);
    const auto res = run_protocol(s.table, sp, ModelKind::Classifier, cands, quick_options(2));
    const auto dir = zinn::testing::scratch_dir("protocol-io");
    write_sweep_results(dir / "sweep.csv", ModelKind::Classifier, res.candidates);
    write_residuals(dir / "res.csv", res.residuals);
    std::ifstream in(dir / "sweep.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "kind,variable_set,architecture,dropout,l2,parameters,cv_n,cv_mse,cv_r2,cv_accuracy,cv_auroc,status");
    std::size_t lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    CHECK(lines == cands.size());
    std::ifstream rin(dir / "res.csv");
    std::getline(rin, header);
    CHECK(header == "row_id,lat,lon,residual");
}
