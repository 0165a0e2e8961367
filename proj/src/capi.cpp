#include "zinn/zinn.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

#include <json.hpp>

#include "bundle.hpp"
#include "dataset.hpp"
#include "demo.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "protocol.hpp"
#include "service.hpp"

struct zinn_table {
    zinn::FeatureTable table;
};

struct zinn_split {
    zinn::SplitAssignment split;
};

struct zinn_model {
    zinn::ModelBundle bundle;
};

struct zinn_context {
    std::unique_ptr<zinn::LocationContext> context;
};

namespace {

using nlohmann::json;

thread_local std::string last_error;

zinn_status set_error(zinn_status status, const std::string& message) {
    last_error = message;
    return status;
}

template <typename F>
zinn_status guard(F&& body) {
    try {
        last_error.clear();
        body();
        return ZINN_OK;
    } catch (const zinn::Error& e) {
        return set_error(static_cast<zinn_status>(e.code()), e.what());
    } catch (const json::exception& e) {
        return set_error(ZINN_INVALID_ARGUMENT, std::string("options: ") + e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return set_error(ZINN_IO, e.what());
    } catch (const std::bad_alloc&) {
        return set_error(ZINN_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(ZINN_INTERNAL, e.what());
    }
}

void require(const void* p, const char* name) {
    if (p == nullptr) zinn::fail(zinn::ErrorCode::InvalidArgument, std::string(name) + " is null");
}

char* dup_string(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

json parse_options(const char* text) {
    if (text == nullptr || *text == '\0') return json::object();
    auto j = json::parse(text);
    if (!j.is_object()) zinn::fail(zinn::ErrorCode::InvalidArgument, "options must be a JSON object");
    return j;
}

// A number, an array of numbers, or an "a:b:step" string.
std::vector<double> grid_option(const json& j, const char* key, std::vector<double> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_string()) return zinn::parse_grid(v.get<std::string>());
    if (v.is_number()) return {v.get<double>()};
    return v.get<std::vector<double>>();
}

zinn::TrainConfig train_config(const json& j) {
    zinn::TrainConfig c;
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.lr_decay = j.value("lr_decay", c.lr_decay);
    c.optimizer = zinn::optimizer_from_string(j.value("optimizer", zinn::to_string(c.optimizer)));
    c.validate();
    return c;
}

zinn::SweepOptions sweep_options(const json& j, zinn::ModelKind kind, const std::string& default_set) {
    zinn::SweepOptions o;
    o.kind = kind;
    if (j.contains("variable_sets")) o.variable_sets = j.at("variable_sets").get<std::vector<std::string>>();
    else o.variable_sets = {j.value("variable_set", default_set)};
    o.family = zinn::family_from_string(j.value("family", zinn::to_string(o.family)));
    if (j.contains("widths")) o.widths = j.at("widths").get<std::vector<std::size_t>>();
    if (j.contains("depths")) o.depths = j.at("depths").get<std::vector<std::size_t>>();
    o.dropouts = grid_option(j, "dropout", o.dropouts);
    o.l2s = grid_option(j, "l2", o.l2s);
    o.activation = zinn::activation_from_string(j.value("activation", zinn::to_string(o.activation)));
    return o;
}

json metrics_json(const zinn::MetricReport& r, zinn::ModelKind kind) {
    json j{{"scope", zinn::to_string(r.scope)}, {"n", r.n}};
    if (kind == zinn::ModelKind::Conditional) {
        j["mse"] = r.mse;
        j["r2"] = r.r2;
    } else {
        j["accuracy"] = r.accuracy;
        j["auroc"] = r.auroc;
    }
    return j;
}

json protocol_json(const zinn::ProtocolResult& p) {
    json candidates = json::array();
    for (const auto& c : p.candidates) {
        json o{{"candidate", c.candidate.describe()}, {"parameters", c.parameters}, {"failed", c.failed}};
        if (c.failed) o["error"] = c.error;
        else o["cv"] = metrics_json(c.cv, p.kind);
        candidates.push_back(std::move(o));
    }
    return {{"candidates", std::move(candidates)},
            {"selected", p.winner().describe()},
            {"test", metrics_json(p.test, p.kind)},
            {"log", p.log}};
}

zinn::Scope scope_from(const char* s) {
    const std::string v = s ? s : "all";
    if (v == "train") return zinn::Scope::Train;
    if (v == "cv") return zinn::Scope::CV;
    if (v == "test") return zinn::Scope::Test;
    if (v == "all") return zinn::Scope::All;
    zinn::fail(zinn::ErrorCode::InvalidArgument, "unknown scope '" + v + "'");
}

}  // namespace

extern "C" {

const char* zinn_status_string(zinn_status status) {
    if (status == ZINN_OK) return "Ok";
    if (status == ZINN_INTERNAL) return "Internal";
    return zinn::to_string(static_cast<zinn::ErrorCode>(status));
}

const char* zinn_last_error_message(void) { return last_error.c_str(); }

void zinn_free_string(char* s) { std::free(s); }

zinn_status zinn_transform_fit(zinn_transform_kind kind, const double* values, size_t n, zinn_transform* out) {
    return guard([&] {
        require(out, "out");
        if (n > 0) require(values, "values");
        const auto spec = zinn::fit_transform(static_cast<zinn::TransformKind>(kind), {values, n});
        *out = {kind, spec.mean, spec.sd};
    });
}

zinn_status zinn_transform_apply(const zinn_transform* t, double x, double* out) {
    return guard([&] {
        require(t, "transform");
        require(out, "out");
        *out = zinn::apply_transform({static_cast<zinn::TransformKind>(t->kind), t->mean, t->sd}, x);
    });
}

zinn_status zinn_transform_invert(const zinn_transform* t, double z, double* out) {
    return guard([&] {
        require(t, "transform");
        require(out, "out");
        *out = zinn::invert_transform({static_cast<zinn::TransformKind>(t->kind), t->mean, t->sd}, z);
    });
}

zinn_status zinn_ingest_events(const char* events_path, const char* window_first, const char* window_last,
                               const char* events_out, const char* rejects_out, size_t* n_events, size_t* n_rejects) {
    return guard([&] {
        require(events_path, "events_path");
        zinn::StudyWindow window;
        if (window_first) window.first = zinn::parse_datetime(window_first);
        if (window_last) window.last = zinn::parse_datetime(window_last);
        const auto r = zinn::ingest_events(events_path, window);
        if (events_out) zinn::write_events(events_out, r.events);
        if (rejects_out) zinn::write_rejects(rejects_out, r.rejects);
        if (n_events) *n_events = r.events.size();
        if (n_rejects) *n_rejects = r.rejects.size();
    });
}

zinn_status zinn_table_assemble(const char* manifest_path, const char* drop_report, zinn_table** out) {
    return guard([&] {
        require(manifest_path, "manifest_path");
        require(out, "out");
        auto r = zinn::assemble_from_manifest(manifest_path);
        if (drop_report) zinn::write_drop_report(drop_report, r.dropped);
        *out = new zinn_table{std::move(r.table)};
    });
}

zinn_status zinn_table_load(const char* path, zinn_table** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new zinn_table{zinn::read_table(path)};
    });
}

zinn_status zinn_table_save(const zinn_table* table, const char* path) {
    return guard([&] {
        require(table, "table");
        require(path, "path");
        zinn::write_table(path, table->table);
    });
}

size_t zinn_table_rows(const zinn_table* table) { return table ? table->table.rows() : 0; }

size_t zinn_table_cols(const zinn_table* table) { return table ? table->table.columns.size() : 0; }

void zinn_table_destroy(zinn_table* table) { delete table; }

zinn_status zinn_split_create(const zinn_table* table, uint64_t seed, const double* fractions, zinn_split** out) {
    return guard([&] {
        require(table, "table");
        require(out, "out");
        std::array<double, 3> f{0.6, 0.2, 0.2};
        if (fractions) f = {fractions[0], fractions[1], fractions[2]};
        *out = new zinn_split{zinn::split(table->table.rows(), seed, f)};
    });
}

zinn_status zinn_split_load(const zinn_table* table, const char* path, zinn_split** out) {
    return guard([&] {
        require(table, "table");
        require(path, "path");
        require(out, "out");
        *out = new zinn_split{zinn::read_split(path, table->table)};
    });
}

zinn_status zinn_split_save(const zinn_split* split, const zinn_table* table, const char* path) {
    return guard([&] {
        require(split, "split");
        require(table, "table");
        require(path, "path");
        zinn::write_split(path, table->table, split->split);
    });
}

zinn_status zinn_split_counts(const zinn_split* split, size_t counts[3]) {
    return guard([&] {
        require(split, "split");
        require(counts, "counts");
        const auto c = split->split.counts();
        for (int i = 0; i < 3; ++i) counts[i] = c[static_cast<std::size_t>(i)];
    });
}

void zinn_split_destroy(zinn_split* split) { delete split; }

zinn_status zinn_sweep(const zinn_table* table, const zinn_split* split, const char* options_json,
                       const char* results_path, char** summary_json) {
    return guard([&] {
        require(table, "table");
        require(split, "split");
        const auto j = parse_options(options_json);
        const auto kind =
            j.value("kind", std::string("conditional")) == "classifier" ? zinn::ModelKind::Classifier
                                                                        : zinn::ModelKind::Conditional;
        if (j.contains("kind") && j.at("kind") != "classifier" && j.at("kind") != "conditional") {
            zinn::fail(zinn::ErrorCode::InvalidArgument, "kind must be conditional or classifier");
        }
        const auto candidates = zinn::make_candidates(table->table, sweep_options(j, kind, "combined"));
        zinn::ProtocolOptions po{train_config(j), j.value("seed", std::uint64_t{1})};
        const auto results = zinn::evaluate_candidates(table->table, split->split, kind, candidates, po);
        if (results_path) zinn::write_sweep_results(results_path, kind, results);
        if (summary_json) {
            json s{{"kind", zinn::to_string(kind)}, {"candidates", results.size()}};
            std::size_t failed = 0;
            for (const auto& r : results) failed += r.failed ? 1 : 0;
            s["failed"] = failed;
            try {
                const auto best = zinn::select_best(kind, results);
                s["best"] = results[best].candidate.describe();
                s["best_cv"] = metrics_json(results[best].cv, kind);
            } catch (const zinn::Error&) {
                s["best"] = nullptr;
            }
            *summary_json = dup_string(s.dump());
        }
    });
}

zinn_status zinn_train(const zinn_table* table, const zinn_split* split, const char* options_json, zinn_model** out,
                       char** report_json) {
    return guard([&] {
        require(table, "table");
        require(split, "split");
        require(out, "out");
        const auto j = parse_options(options_json);
        zinn::ZiTrainOptions o;
        o.variable_set = j.value("variable_set", o.variable_set);
        o.seed = j.value("seed", o.seed);
        o.train = train_config(j);
        const auto sub = [&](const char* key, zinn::ModelKind kind) -> std::vector<zinn::Candidate> {
            if (!j.contains(key)) return {};
            auto so = sweep_options(j.at(key), kind, o.variable_set);
            so.variable_sets = {o.variable_set};
            return zinn::make_candidates(table->table, so);
        };
        o.conditional = sub("conditional", zinn::ModelKind::Conditional);
        o.classifier = sub("classifier", zinn::ModelKind::Classifier);

        auto r = zinn::train_zero_inflated(table->table, split->split, o);
        if (j.contains("conditional_residuals")) {
            zinn::write_residuals(j.at("conditional_residuals").get<std::string>(), r.conditional.residuals);
        }
        if (j.contains("classifier_residuals")) {
            zinn::write_residuals(j.at("classifier_residuals").get<std::string>(), r.classifier.residuals);
        }

        json report{{"variable_set", o.variable_set},
                    {"seed", o.seed},
                    {"train_config",
                     {{"batch_size", o.train.batch_size},
                      {"epochs", o.train.epochs},
                      {"learning_rate", o.train.learning_rate},
                      {"lr_decay", o.train.lr_decay},
                      {"optimizer", zinn::to_string(o.train.optimizer)}}},
                    {"split_counts", split->split.counts()},
                    {"conditional", protocol_json(r.conditional)},
                    {"classifier", protocol_json(r.classifier)},
                    {"ziln",
                     {{"conditional_test", metrics_json(r.ziln_conditional_test, zinn::ModelKind::Conditional)},
                      {"classifier_test", metrics_json(r.ziln_classifier_test, zinn::ModelKind::Classifier)},
                      {"logistic_converged", r.ziln.logistic_converged},
                      {"logistic_degenerate", r.ziln.logistic_degenerate},
                      {"residual_sd", r.ziln.residual_sd}}}};

        auto model = std::make_unique<zinn_model>();
        auto& b = model->bundle;
        b.created = zinn::bundle_timestamp();
        b.model = std::move(r.model);
        b.natural_means = table->table.natural_means;
        b.roster = table->table.roster;
        b.config = table->table.config;
        b.metadata = report.dump();
        if (report_json) *report_json = dup_string(report.dump(2));
        *out = model.release();
    });
}

zinn_status zinn_model_load(const char* path, zinn_model** out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new zinn_model{zinn::load_bundle(path)};
    });
}

zinn_status zinn_model_save(const zinn_model* model, const char* path) {
    return guard([&] {
        require(model, "model");
        require(path, "path");
        zinn::save_bundle(path, model->bundle);
    });
}

void zinn_model_destroy(zinn_model* model) { delete model; }

size_t zinn_model_input_width(const zinn_model* model) { return model ? model->bundle.model.input_width() : 0; }

zinn_status zinn_model_metadata(const zinn_model* model, char** out) {
    return guard([&] {
        require(model, "model");
        require(out, "out");
        *out = dup_string(zinn::handle_model(model->bundle).body);
    });
}

zinn_status zinn_model_predict(const zinn_model* model, const double* features, size_t n, zinn_prediction* out) {
    return guard([&] {
        require(model, "model");
        require(out, "out");
        if (n > 0) require(features, "features");
        const auto d = zinn::predict(model->bundle.model, std::span<const double>(features, n));
        *out = {d.p_damage, d.conditional_transformed, d.conditional_usd, d.expected_usd, d.damage_flag ? 1 : 0,
                d.floored ? 1 : 0};
    });
}

zinn_status zinn_evaluate(const zinn_model* model, const zinn_table* table, const zinn_split* split,
                          const char* scope, char** report_json) {
    return guard([&] {
        require(model, "model");
        require(table, "table");
        require(report_json, "report_json");
        const auto sc = scope_from(scope);
        std::vector<std::size_t> rows;
        if (sc != zinn::Scope::All) {
            require(split, "split");
            if (split->split.assignment.size() != table->table.rows()) {
                zinn::fail(zinn::ErrorCode::ShapeMismatch, "split does not match table rows");
            }
            const auto part = sc == zinn::Scope::Train ? zinn::Partition::Train
                              : sc == zinn::Scope::CV  ? zinn::Partition::CrossValidation
                                                       : zinn::Partition::Test;
            rows = split->split.indices(part);
            if (rows.empty()) zinn::fail(zinn::ErrorCode::InvalidArgument, "no rows in scope");
        }
        const auto ev = zinn::evaluate_model(model->bundle.model, table->table, rows, sc);
        const json j{{"conditional", metrics_json(ev.conditional, zinn::ModelKind::Conditional)},
                     {"classifier", metrics_json(ev.classifier, zinn::ModelKind::Classifier)},
                     {"floored", ev.floored}};
        *report_json = dup_string(j.dump(2));
    });
}

zinn_status zinn_context_load(const char* manifest_path, zinn_context** out) {
    return guard([&] {
        require(manifest_path, "manifest_path");
        require(out, "out");
        *out = new zinn_context{zinn::load_location_context(zinn::read_manifest(manifest_path))};
    });
}

void zinn_context_destroy(zinn_context* context) { delete context; }

zinn_status zinn_predict_request(const zinn_model* model, const zinn_context* context, const char* request_json,
                                 int* http_status, char** response_json) {
    return guard([&] {
        require(model, "model");
        require(context, "context");
        require(request_json, "request_json");
        require(response_json, "response_json");
        const auto r = zinn::handle_predict(model->bundle, *context->context, request_json);
        if (http_status) *http_status = r.status;
        *response_json = dup_string(r.body);
    });
}

zinn_status zinn_grid(const zinn_model* model, const zinn_context* context, const char* options_json,
                      char** summary_json) {
    return guard([&] {
        require(model, "model");
        require(context, "context");
        const auto j = parse_options(options_json);
        zinn::GridRunOptions o;
        o.boundary = j.at("boundary").get<std::string>();
        if (j.contains("cities")) o.cities = j.at("cities").get<std::string>();
        o.year = j.value("year", o.year);
        if (j.contains("months")) o.months = j.at("months").get<std::vector<int>>();
        o.out_dir = j.at("out_dir").get<std::string>();
        const auto s = zinn::run_grid(model->bundle.model, model->bundle.encoder(), *context->context, o);
        if (summary_json) {
            const json out{{"grid_points", s.grid_points}, {"inside_points", s.inside_points},
                           {"cities", s.cities},           {"predicted", s.predicted},
                           {"failed", s.failed},           {"year", o.year}};
            *summary_json = dup_string(out.dump());
        }
    });
}

zinn_status zinn_serve(const zinn_model* model, const zinn_context* context, const char* host, int port,
                       const char* grid_dir) {
    return guard([&] {
        require(model, "model");
        require(context, "context");
        zinn::ServeOptions o;
        if (host) o.host = host;
        o.port = port;
        if (grid_dir) o.grid_dir = grid_dir;
        zinn::serve(model->bundle, *context->context, o);
    });
}

zinn_status zinn_demo_fig1(uint64_t seed, char** report_csv) {
    return guard([&] {
        require(report_csv, "report_csv");
        *report_csv = dup_string(zinn::run_fig1(seed).to_csv());
    });
}

}  // extern "C"
