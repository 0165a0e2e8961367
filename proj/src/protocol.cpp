#include "protocol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>

#include "csv.hpp"
#include "error.hpp"

namespace zinn {

std::string to_string(ModelKind k) { return k == ModelKind::Conditional ? "conditional" : "classifier"; }

std::string Candidate::describe() const {
    return variable_set + "|" + spec.architecture() + "|dropout=" + csv::format_number(spec.dropout) +
           "|l2=" + csv::format_number(spec.l2);
}

std::string to_string(ArchitectureFamily f) {
    switch (f) {
        case ArchitectureFamily::Descending: return "descending";
        case ArchitectureFamily::Wide: return "wide";
        case ArchitectureFamily::Deep: return "deep";
    }
    return "descending";
}

ArchitectureFamily family_from_string(const std::string& s) {
    if (s == "descending") return ArchitectureFamily::Descending;
    if (s == "wide") return ArchitectureFamily::Wide;
    if (s == "deep") return ArchitectureFamily::Deep;
    fail(ErrorCode::InvalidArgument, "unknown architecture family '" + s + "'");
}

std::vector<Candidate> make_candidates(const FeatureTable& table, const SweepOptions& o) {
    if (o.dropouts.empty() || o.l2s.empty()) fail(ErrorCode::InvalidArgument, "empty dropout or l2 grid");
    std::vector<Candidate> out;
    for (const auto& set : o.variable_sets) {
        const auto n = variable_set(table, set).size();
        std::vector<std::vector<std::size_t>> archs;
        switch (o.family) {
            case ArchitectureFamily::Descending: archs = descending_architectures(n); break;
            case ArchitectureFamily::Wide: archs = wide_architectures(o.widths); break;
            case ArchitectureFamily::Deep: archs = deep_architectures(n, o.depths); break;
        }
        for (const auto& hidden : archs) {
            for (double p : o.dropouts) {
                for (double l2 : o.l2s) {
                    Candidate c;
                    c.variable_set = set;
                    c.spec.input = n;
                    c.spec.hidden = hidden;
                    c.spec.hidden_activation = o.activation;
                    c.spec.output_activation =
                        o.kind == ModelKind::Classifier ? Activation::Logistic : Activation::Identity;
                    c.spec.dropout = p;
                    c.spec.l2 = l2;
                    c.spec.validate();
                    out.push_back(std::move(c));
                }
            }
        }
    }
    return out;
}

std::vector<double> parse_grid(const std::string& text) {
    const auto parts = csv::split(text, ':');
    std::vector<double> v;
    for (const auto& p : parts) {
        const auto x = csv::parse_number(csv::trim(p));
        if (!x) fail(ErrorCode::InvalidArgument, "bad grid '" + text + "'");
        v.push_back(*x);
    }
    if (v.size() == 1) return v;
    if (v.size() != 3 || !(v[2] > 0.0) || v[1] < v[0]) {
        fail(ErrorCode::InvalidArgument, "grid must be a value or a:b:step with step > 0 and b >= a");
    }
    std::vector<double> out;
    for (std::size_t i = 0;; ++i) {
        const double x = std::round((v[0] + static_cast<double>(i) * v[2]) * 1e12) / 1e12;
        if (x > v[1] + 1e-9 * std::max(1.0, std::abs(v[1]))) break;
        out.push_back(x);
        if (out.size() > 100000) fail(ErrorCode::InvalidArgument, "grid too large");
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

TrainConfig config_for(ModelKind kind, const TrainConfig& base, std::uint64_t seed) {
    TrainConfig c = base;
    c.loss = kind == ModelKind::Classifier ? LossKind::BinaryCrossEntropy : LossKind::MseTransformed;
    c.seed = seed;
    return c;
}

MetricReport score(ModelKind kind, Scope scope, std::span<const double> pred, std::span<const double> truth) {
    return kind == ModelKind::Classifier ? classifier_report(scope, pred, truth) : regression_report(scope, pred, truth);
}

// Lower is better.
double selection_key(ModelKind kind, const MetricReport& r) { return kind == ModelKind::Classifier ? -r.auroc : r.mse; }

NetworkParams fit(const FeatureTable& table, std::span<const std::size_t> rows, std::span<const std::size_t> columns,
                  const NetworkSpec& spec, ModelKind kind, const TrainConfig& base, std::uint64_t init_seed,
                  std::uint64_t train_seed) {
    const auto x = table.x.select_rows(rows).select_columns(columns);
    const auto y = targets(table, rows, kind);
    return train(spec, init_params(spec, init_seed), x, y, config_for(kind, base, train_seed)).params;
}

std::vector<std::size_t> merge(std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    return a;
}

}  // namespace

std::vector<std::size_t> usable_rows(const FeatureTable& table, const SplitAssignment& split, Partition p,
                                     ModelKind kind) {
    if (split.assignment.size() != table.rows()) fail(ErrorCode::ShapeMismatch, "split does not match table rows");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        if (split.assignment[i] != p) continue;
        if (kind == ModelKind::Conditional && !(table.outcome_raw[i] > 0.0)) continue;
        out.push_back(i);
    }
    return out;
}

std::vector<double> targets(const FeatureTable& table, std::span<const std::size_t> rows, ModelKind kind) {
    std::vector<double> y;
    y.reserve(rows.size());
    for (auto r : rows) y.push_back(kind == ModelKind::Classifier ? (table.outcome_raw[r] > 0.0 ? 1.0 : 0.0)
                                                                   : table.outcome[r]);
    return y;
}

std::vector<CandidateResult> evaluate_candidates(const FeatureTable& table, const SplitAssignment& split,
                                                 ModelKind kind, std::span<const Candidate> candidates,
                                                 const ProtocolOptions& options) {
    if (candidates.empty()) fail(ErrorCode::InvalidArgument, "no candidates");
    const auto train_rows = usable_rows(table, split, Partition::Train, kind);
    const auto cv_rows = usable_rows(table, split, Partition::CrossValidation, kind);
    const auto cv_truth = targets(table, cv_rows, kind);

    std::vector<CandidateResult> results;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        CandidateResult r;
        r.candidate = candidates[i];
        r.parameters = r.candidate.spec.parameter_count();
        try {
            const auto cols = variable_set(table, r.candidate.variable_set);
            if (cols.size() != r.candidate.spec.input) {
                fail(ErrorCode::ShapeMismatch, "candidate input width does not match its variable set");
            }
            const auto params = fit(table, train_rows, cols, r.candidate.spec, kind, options.train,
                                    derive_seed(options.seed, 1, i), derive_seed(options.seed, 2, i));
            const auto pred = predict(params, r.candidate.spec, table.x.select_rows(cv_rows).select_columns(cols));
            r.cv = score(kind, Scope::CV, pred, cv_truth);
        } catch (const Error& e) {
            r.failed = true;
            r.error = std::string(to_string(e.code())) + ": " + e.what();
        }
        results.push_back(std::move(r));
    }
    return results;
}

std::size_t select_best(ModelKind kind, std::span<const CandidateResult> results) {
    std::optional<std::size_t> best;
    auto key = [&](const CandidateResult& r) {
        return std::make_tuple(selection_key(kind, r.cv), r.parameters, r.candidate.describe());
    };
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].failed || std::isnan(selection_key(kind, results[i].cv))) continue;
        if (!best || key(results[i]) < key(results[*best])) best = i;
    }
    if (!best) fail(ErrorCode::InvalidArgument, "every candidate failed");
    return *best;
}

ProtocolResult run_protocol(const FeatureTable& table, const SplitAssignment& split, ModelKind kind,
                            std::span<const Candidate> candidates, const ProtocolOptions& options) {
    ProtocolResult out;
    out.kind = kind;
    out.candidates = evaluate_candidates(table, split, kind, candidates, options);
    for (const auto& c : out.candidates) {
        out.log.push_back("candidate " + c.candidate.describe() +
                          (c.failed ? " failed: " + c.error
                                    : " cv " + std::string(kind == ModelKind::Classifier ? "auroc " : "mse ") +
                                          csv::format_number(selection_key(kind, c.cv) *
                                                             (kind == ModelKind::Classifier ? -1.0 : 1.0))));
    }
    out.best = select_best(kind, out.candidates);
    const auto& spec = out.winner().spec;
    out.columns = variable_set(table, out.winner().variable_set);
    out.log.push_back("selected " + out.winner().describe());

    const auto train_rows = usable_rows(table, split, Partition::Train, kind);
    const auto cv_rows = usable_rows(table, split, Partition::CrossValidation, kind);
    const auto test_rows = usable_rows(table, split, Partition::Test, kind);
    const auto train_cv = merge(train_rows, cv_rows);
    out.retrained = fit(table, train_cv, out.columns, spec, kind, options.train, derive_seed(options.seed, 3, 0),
                        derive_seed(options.seed, 3, 1));
    out.log.push_back("retrained on train+cv (" + std::to_string(train_cv.size()) + " rows)");

    const auto test_pred = predict(out.retrained, spec, table.x.select_rows(test_rows).select_columns(out.columns));
    out.test = score(kind, Scope::Test, test_pred, targets(table, test_rows, kind));
    out.residuals = residuals(table, test_rows, out.columns, spec, out.retrained, kind);
    out.log.push_back("tested on " + std::to_string(test_rows.size()) + " rows");

    const auto all_rows = merge(train_cv, test_rows);
    out.final_params = fit(table, all_rows, out.columns, spec, kind, options.train, derive_seed(options.seed, 4, 0),
                           derive_seed(options.seed, 4, 1));
    out.log.push_back("refit on all " + std::to_string(all_rows.size()) + " rows");
    return out;
}

std::vector<Residual> residuals(const FeatureTable& table, std::span<const std::size_t> rows,
                                std::span<const std::size_t> columns, const NetworkSpec& spec,
                                const NetworkParams& params, ModelKind kind) {
    std::vector<Residual> out;
    ForwardCache cache;
    std::vector<double> x(columns.size());
    for (auto r : rows) {
        if (kind == ModelKind::Conditional && !(table.outcome_raw[r] > 0.0)) continue;
        for (std::size_t j = 0; j < columns.size(); ++j) x[j] = table.x(r, columns[j]);
        const double pred = forward(params, spec, x, Mode::Eval, nullptr, cache);
        double v;
        if (kind == ModelKind::Conditional) {
            v = std::abs(pred - table.outcome[r]);
        } else {
            const double label = table.outcome_raw[r] > 0.0 ? 1.0 : 0.0;
            v = (pred - label) * (pred - label);
        }
        out.push_back({table.row_ids[r], table.lat[r], table.lon[r], v});
    }
    return out;
}

void write_residuals(const std::filesystem::path& path, std::span<const Residual> residuals) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << "row_id,lat,lon,residual\n";
    for (const auto& r : residuals) {
        out << csv::quote(r.row_id) << ',' << csv::format_number(r.lat) << ',' << csv::format_number(r.lon) << ','
            << csv::format_number(r.value) << '\n';
    }
}

void write_sweep_results(const std::filesystem::path& path, ModelKind kind, std::span<const CandidateResult> results) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << "kind,variable_set,architecture,dropout,l2,parameters,cv_n,cv_mse,cv_r2,cv_accuracy,cv_auroc,status\n";
    for (const auto& r : results) {
        const auto& c = r.candidate;
        out << to_string(kind) << ',' << c.variable_set << ',' << csv::quote(c.spec.architecture()) << ','
            << csv::format_number(c.spec.dropout) << ',' << csv::format_number(c.spec.l2) << ',' << r.parameters
            << ',';
        if (r.failed) {
            out << ",,,,," << csv::quote("failed: " + r.error) << '\n';
            continue;
        }
        const bool clf = kind == ModelKind::Classifier;
        out << r.cv.n << ',' << (clf ? "" : csv::format_number(r.cv.mse)) << ','
            << (clf ? "" : csv::format_number(r.cv.r2)) << ',' << (clf ? csv::format_number(r.cv.accuracy) : "")
            << ',' << (clf ? csv::format_number(r.cv.auroc) : "") << ",ok\n";
    }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Candidate> default_candidates(const FeatureTable& table, const std::string& set, ModelKind kind) {
    SweepOptions o;
    o.kind = kind;
    o.variable_sets = {set};
    o.family = ArchitectureFamily::Wide;
    o.widths = {100};
    o.dropouts = {kind == ModelKind::Conditional ? 0.2 : 0.1};
    return make_candidates(table, o);
}

}  // namespace

ZiTrainResult train_zero_inflated(const FeatureTable& table, const SplitAssignment& split,
                                  const ZiTrainOptions& options) {
    auto cond = options.conditional.empty() ? default_candidates(table, options.variable_set, ModelKind::Conditional)
                                            : options.conditional;
    auto clf = options.classifier.empty() ? default_candidates(table, options.variable_set, ModelKind::Classifier)
                                          : options.classifier;
    for (const auto* list : {&cond, &clf}) {
        for (const auto& c : *list) {
            if (c.variable_set != options.variable_set) {
                fail(ErrorCode::InvalidArgument, "both networks must use variable set '" + options.variable_set + "'");
            }
        }
    }

    ZiTrainResult out;
    ProtocolOptions po{options.train, derive_seed(options.seed, 10)};
    out.conditional = run_protocol(table, split, ModelKind::Conditional, cond, po);
    po.seed = derive_seed(options.seed, 11);
    out.classifier = run_protocol(table, split, ModelKind::Classifier, clf, po);

    auto& m = out.model;
    m.conditional_spec = out.conditional.winner().spec;
    m.conditional = out.conditional.final_params;
    m.classifier_spec = out.classifier.winner().spec;
    m.classifier = out.classifier.final_params;
    m.outcome = table.outcome_spec;
    for (auto c : out.conditional.columns) m.columns.push_back(table.columns[c]);
    m.validate();

    // Baseline on the same columns: fit on Train + CV, score on Test.
    const auto& cols = out.conditional.columns;
    std::vector<std::size_t> fit_rows, test_rows;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        (split.assignment[i] == Partition::Test ? test_rows : fit_rows).push_back(i);
    }
    const auto labels = targets(table, fit_rows, ModelKind::Classifier);
    const auto y = targets(table, fit_rows, ModelKind::Conditional);
    out.ziln = fit_ziln(table.x.select_rows(fit_rows).select_columns(cols), labels, y, table.outcome_spec);

    std::vector<double> p, label, cond_pred, cond_truth;
    std::vector<double> x(cols.size());
    for (auto r : test_rows) {
        for (std::size_t j = 0; j < cols.size(); ++j) x[j] = table.x(r, cols[j]);
        const auto d = predict_ziln(out.ziln, x);
        p.push_back(d.p_damage);
        label.push_back(table.outcome_raw[r] > 0.0 ? 1.0 : 0.0);
        if (table.outcome_raw[r] > 0.0) {
            cond_pred.push_back(d.conditional_transformed);
            cond_truth.push_back(table.outcome[r]);
        }
    }
    out.ziln_conditional_test = regression_report(Scope::Test, cond_pred, cond_truth);
    out.ziln_classifier_test = classifier_report(Scope::Test, p, label);
    return out;
}

Matrix model_inputs(const ZeroInflatedModel& model, const FeatureTable& table, std::span<const std::size_t> rows) {
    std::vector<std::size_t> cols;
    for (const auto& c : model.columns) {
        const auto idx = table.column_index(c.name);
        if (!idx) fail(ErrorCode::RosterMismatch, "table lacks model column '" + c.name + "'");
        if (!(table.columns[*idx].transform == c.transform)) {
            fail(ErrorCode::RosterMismatch, "column '" + c.name + "' was encoded with a different transform");
        }
        cols.push_back(*idx);
    }
    return table.x.select_rows(rows).select_columns(cols);
}

ModelEvaluation evaluate_model(const ZeroInflatedModel& model, const FeatureTable& table,
                               std::span<const std::size_t> rows, Scope scope) {
    std::vector<std::size_t> all;
    if (rows.empty()) {
        all = iota_indices(table.rows());
        rows = all;
    }
    const auto x = model_inputs(model, table, rows);
    ModelEvaluation ev;
    std::vector<double> p, label, cond_pred, cond_truth;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto d = predict(model, x.row(i));
        if (d.floored) ++ev.floored;
        const auto r = rows[i];
        p.push_back(d.p_damage);
        label.push_back(table.outcome_raw[r] > 0.0 ? 1.0 : 0.0);
        if (table.outcome_raw[r] > 0.0) {
            cond_pred.push_back(d.conditional_transformed);
            cond_truth.push_back(table.outcome[r]);
        }
    }
    ev.conditional = regression_report(scope, cond_pred, cond_truth);
    ev.classifier = classifier_report(scope, p, label);
    return ev;
}

}  // namespace zinn
