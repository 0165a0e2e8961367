// Command-line front end over the zinn C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zinn/zinn.h"

namespace {

using nlohmann::json;

struct Failure {
    zinn_status status;
};

void check(zinn_status s) {
    if (s != ZINN_OK) {
        std::cerr << "error: " << zinn_status_string(s) << ": " << zinn_last_error_message() << '\n';
        throw Failure{s};
    }
}

// Owns a string returned by the library.
struct OwnedString {
    char* p = nullptr;
    ~OwnedString() { zinn_free_string(p); }
    std::string str() const { return p ? p : ""; }
};

template <typename T, void (*Destroy)(T*)>
struct Handle {
    T* p = nullptr;
    ~Handle() { Destroy(p); }
};

using Table = Handle<zinn_table, zinn_table_destroy>;
using Split = Handle<zinn_split, zinn_split_destroy>;
using Model = Handle<zinn_model, zinn_model_destroy>;
using Context = Handle<zinn_context, zinn_context_destroy>;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << path << '\n';
        throw Failure{ZINN_IO};
    }
    out << text;
}

// "0.1:0.9:0.1" stays a string for the library to expand; plain numbers
// become numbers.
json grid_value(const std::string& text) {
    if (text.find(':') != std::string::npos) return text;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0') throw CLI::ValidationError("grid", "bad value '" + text + "'");
    return v;
}

struct TrainFlags {
    std::size_t epochs = 200;
    std::size_t batch_size = 50;
    double learning_rate = 0.01;
    double lr_decay = 1.0;
    std::string optimizer = "adagrad";
    std::uint64_t seed = 1;

    void add(CLI::App* app) {
        app->add_option("--epochs", epochs, "Training epochs")->check(CLI::PositiveNumber);
        app->add_option("--batch-size", batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
        app->add_option("--learning-rate", learning_rate, "Optimizer learning rate")->check(CLI::PositiveNumber);
        app->add_option("--lr-decay", lr_decay, "Learning-rate multiplier per epoch");
        app->add_option("--optimizer", optimizer, "adagrad or adam")->check(CLI::IsMember({"adagrad", "adam"}));
        app->add_option("--seed", seed, "Random seed");
    }

    void fill(json& j) const {
        j["epochs"] = epochs;
        j["batch_size"] = batch_size;
        j["learning_rate"] = learning_rate;
        j["lr_decay"] = lr_decay;
        j["optimizer"] = optimizer;
        j["seed"] = seed;
    }
};

struct FamilyFlags {
    std::string family = "descending";
    std::vector<std::size_t> widths;
    std::vector<std::size_t> depths;
    std::string dropout = "0";
    std::string l2 = "0";
    std::string activation = "relu";
    bool given = false;

    void add(CLI::App* app, const std::string& prefix, const std::string& default_family) {
        family = default_family;
        auto opt = [&](auto* o) {
            o->each([this](const std::string&) { given = true; });
            return o;
        };
        opt(app->add_option("--" + prefix + "family", family, "descending, wide or deep"))
            ->check(CLI::IsMember({"descending", "wide", "deep"}));
        opt(app->add_option("--" + prefix + "widths", widths, "Widths for the wide family")->delimiter(','));
        opt(app->add_option("--" + prefix + "depths", depths, "Depths for the deep family")->delimiter(','));
        opt(app->add_option("--" + prefix + "dropout", dropout, "Dropout value or a:b:step grid"));
        opt(app->add_option("--" + prefix + "l2", l2, "L2 value or a:b:step grid"));
        opt(app->add_option("--" + prefix + "activation", activation, "relu or elu"))
            ->check(CLI::IsMember({"relu", "elu"}));
    }

    json to_json() const {
        json j{{"family", family}, {"dropout", grid_value(dropout)}, {"l2", grid_value(l2)}, {"activation", activation}};
        if (!widths.empty()) j["widths"] = widths;
        if (!depths.empty()) j["depths"] = depths;
        return j;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-inflated neural network models of tornado property damage"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Validate an events file and write a reject report");
    std::string events, events_out, rejects_out, first, last;
    ingest->add_option("--events", events, "Events CSV")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", events_out, "Accepted events CSV");
    ingest->add_option("--rejects", rejects_out, "Reject report CSV");
    ingest->add_option("--first", first, "Study window start (YYYY-MM-DD)");
    ingest->add_option("--last", last, "Study window end (YYYY-MM-DD[THH:MM:SS])");

    // assemble
    auto* assemble = app.add_subcommand("assemble", "Build the feature table from a source manifest");
    std::string manifest, table_path, drops;
    assemble->add_option("--manifest", manifest, "Source manifest JSON")->required()->check(CLI::ExistingFile);
    assemble->add_option("--out", table_path, "Feature table CSV")->required();
    assemble->add_option("--drops", drops, "Drop report CSV");

    // split
    auto* split_cmd = app.add_subcommand("split", "Assign rows to train / cv / test");
    std::string split_path;
    std::uint64_t split_seed = 1;
    std::vector<double> fractions;
    split_cmd->add_option("--table", table_path, "Feature table CSV")->required()->check(CLI::ExistingFile);
    split_cmd->add_option("--out", split_path, "Split CSV")->required();
    split_cmd->add_option("--seed", split_seed, "Random seed");
    split_cmd->add_option("--fractions", fractions, "Three fractions, e.g. 0.6,0.2,0.2")
        ->delimiter(',')
        ->expected(3);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Train candidates on the training set and score them on CV");
    std::string results_path, kind = "conditional";
    std::vector<std::string> variable_sets;
    TrainFlags sweep_train;
    FamilyFlags sweep_family;
    sweep->add_option("--table", table_path, "Feature table CSV")->required()->check(CLI::ExistingFile);
    sweep->add_option("--split", split_path, "Split CSV")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", results_path, "Sweep results CSV")->required();
    sweep->add_option("--kind", kind, "conditional or classifier")->check(CLI::IsMember({"conditional", "classifier"}));
    sweep->add_option("--variable-set", variable_sets, "Variable set (repeatable)")
        ->check(CLI::IsMember({"beforehand", "storm_characteristic", "combined", "no_lc", "no_acs"}));
    sweep_family.add(sweep, "", "descending");
    sweep_train.add(sweep);

    // train
    auto* train = app.add_subcommand("train", "Run the full protocol for both networks and save a model bundle");
    std::string model_path, report_path, residuals_dir, variable_set = "combined";
    TrainFlags train_flags;
    FamilyFlags cond_family, clf_family;
    train->add_option("--table", table_path, "Feature table CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--split", split_path, "Split CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--out", model_path, "Model bundle")->required();
    train->add_option("--report", report_path, "Training report JSON");
    train->add_option("--residuals-dir", residuals_dir, "Directory for test residual exports");
    train->add_option("--variable-set", variable_set, "Variable set for both networks")
        ->check(CLI::IsMember({"beforehand", "storm_characteristic", "combined", "no_lc", "no_acs"}));
    cond_family.add(train, "cond-", "wide");
    clf_family.add(train, "clf-", "wide");
    train_flags.add(train);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score a model bundle on a feature table");
    std::string scope = "all";
    evaluate->add_option("--model", model_path, "Model bundle")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--table", table_path, "Feature table CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--split", split_path, "Split CSV")->check(CLI::ExistingFile);
    evaluate->add_option("--scope", scope, "train, cv, test or all")->check(CLI::IsMember({"train", "cv", "test", "all"}));

    // grid
    auto* grid = app.add_subcommand("grid", "Predict monthly scenarios over the grid and cities");
    std::string boundary, cities, out_dir;
    int year = 2019;
    std::vector<int> months;
    grid->add_option("--model", model_path, "Model bundle")->required()->check(CLI::ExistingFile);
    grid->add_option("--manifest", manifest, "Source manifest JSON")->required()->check(CLI::ExistingFile);
    grid->add_option("--boundary", boundary, "Boundary polygon CSV")->required()->check(CLI::ExistingFile);
    grid->add_option("--cities", cities, "City table CSV")->check(CLI::ExistingFile);
    grid->add_option("--year", year, "Scenario year");
    grid->add_option("--months", months, "Months (default all)")->delimiter(',')->check(CLI::Range(1, 12));
    grid->add_option("--out", out_dir, "Output directory")->required();

    // predict
    auto* predict = app.add_subcommand("predict", "Predict damage for one storm scenario");
    double lat = 0, lon = 0, length = 0, width = 0, duration = 0;
    std::string datetime;
    bool multi_vortex = false;
    std::vector<std::string> overrides;
    predict->add_option("--model", model_path, "Model bundle")->required()->check(CLI::ExistingFile);
    predict->add_option("--manifest", manifest, "Source manifest JSON")->required()->check(CLI::ExistingFile);
    predict->add_option("--lat", lat, "Beginning latitude")->required();
    predict->add_option("--lon", lon, "Beginning longitude")->required();
    predict->add_option("--datetime", datetime, "YYYY-MM-DDTHH:MM")->required();
    predict->add_option("--length", length, "Path length")->required();
    predict->add_option("--width", width, "Path width")->required();
    auto* duration_opt = predict->add_option("--duration", duration, "Duration in seconds");
    predict->add_flag("--multi-vortex", multi_vortex, "Multi-vortex tornado");
    predict->add_option("--set", overrides, "Override a roster feature: name=value (repeatable)");

    // serve
    auto* serve = app.add_subcommand("serve", "Serve the HTTP inference API");
    std::string host = "127.0.0.1", grid_dir;
    int port = 8080;
    serve->add_option("--model", model_path, "Model bundle")->required()->check(CLI::ExistingFile);
    serve->add_option("--manifest", manifest, "Source manifest JSON")->required()->check(CLI::ExistingFile);
    serve->add_option("--host", host, "Bind host");
    serve->add_option("--port", port, "Bind port")->check(CLI::Range(0, 65535));
    serve->add_option("--grid-dir", grid_dir, "Directory written by the grid command");

    // demo-fig1
    auto* demo = app.add_subcommand("demo-fig1", "Fit y = 5x, x^2 and sin(x) ln(|x|+1) with a 32-unit network");
    std::uint64_t demo_seed = 1;
    std::string demo_out;
    demo->add_option("--seed", demo_seed, "Random seed");
    demo->add_option("--out", demo_out, "Also write the CSV report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ingest) {
            std::size_t n = 0, r = 0;
            check(zinn_ingest_events(events.c_str(), first.empty() ? nullptr : first.c_str(),
                                     last.empty() ? nullptr : last.c_str(),
                                     events_out.empty() ? nullptr : events_out.c_str(),
                                     rejects_out.empty() ? nullptr : rejects_out.c_str(), &n, &r));
            std::cout << "events " << n << "\nrejects " << r << '\n';
        } else if (*assemble) {
            Table t;
            check(zinn_table_assemble(manifest.c_str(), drops.empty() ? nullptr : drops.c_str(), &t.p));
            check(zinn_table_save(t.p, table_path.c_str()));
            std::cout << "rows " << zinn_table_rows(t.p) << "\ncolumns " << zinn_table_cols(t.p) << '\n';
        } else if (*split_cmd) {
            Table t;
            Split s;
            check(zinn_table_load(table_path.c_str(), &t.p));
            check(zinn_split_create(t.p, split_seed, fractions.empty() ? nullptr : fractions.data(), &s.p));
            check(zinn_split_save(s.p, t.p, split_path.c_str()));
            std::size_t c[3];
            check(zinn_split_counts(s.p, c));
            std::cout << "train " << c[0] << "\ncv " << c[1] << "\ntest " << c[2] << '\n';
        } else if (*sweep) {
            Table t;
            Split s;
            check(zinn_table_load(table_path.c_str(), &t.p));
            check(zinn_split_load(t.p, split_path.c_str(), &s.p));
            json o = sweep_family.to_json();
            o["kind"] = kind;
            o["variable_sets"] = variable_sets.empty() ? std::vector<std::string>{"combined"} : variable_sets;
            sweep_train.fill(o);
            OwnedString summary;
            check(zinn_sweep(t.p, s.p, o.dump().c_str(), results_path.c_str(), &summary.p));
            std::cout << json::parse(summary.str()).dump(2) << '\n';
        } else if (*train) {
            Table t;
            Split s;
            Model m;
            check(zinn_table_load(table_path.c_str(), &t.p));
            check(zinn_split_load(t.p, split_path.c_str(), &s.p));
            json o{{"variable_set", variable_set}};
            train_flags.fill(o);
            if (cond_family.given) o["conditional"] = cond_family.to_json();
            if (clf_family.given) o["classifier"] = clf_family.to_json();
            if (!residuals_dir.empty()) {
                o["conditional_residuals"] = residuals_dir + "/conditional_residuals.csv";
                o["classifier_residuals"] = residuals_dir + "/classifier_residuals.csv";
            }
            OwnedString report;
            check(zinn_train(t.p, s.p, o.dump().c_str(), &m.p, &report.p));
            check(zinn_model_save(m.p, model_path.c_str()));
            if (!report_path.empty()) write_text(report_path, report.str() + "\n");
            const auto r = json::parse(report.str());
            std::cout << "conditional " << r["conditional"]["selected"].get<std::string>() << " test mse "
                      << r["conditional"]["test"]["mse"] << "\nclassifier "
                      << r["classifier"]["selected"].get<std::string>() << " test auroc "
                      << r["classifier"]["test"]["auroc"] << '\n';
        } else if (*evaluate) {
            Table t;
            Split s;
            Model m;
            check(zinn_model_load(model_path.c_str(), &m.p));
            check(zinn_table_load(table_path.c_str(), &t.p));
            if (!split_path.empty()) check(zinn_split_load(t.p, split_path.c_str(), &s.p));
            OwnedString report;
            check(zinn_evaluate(m.p, t.p, s.p, scope.c_str(), &report.p));
            std::cout << report.str() << '\n';
        } else if (*grid) {
            Model m;
            Context c;
            check(zinn_model_load(model_path.c_str(), &m.p));
            check(zinn_context_load(manifest.c_str(), &c.p));
            json o{{"boundary", boundary}, {"year", year}, {"out_dir", out_dir}};
            if (!cities.empty()) o["cities"] = cities;
            if (!months.empty()) o["months"] = months;
            OwnedString summary;
            check(zinn_grid(m.p, c.p, o.dump().c_str(), &summary.p));
            std::cout << json::parse(summary.str()).dump(2) << '\n';
        } else if (*predict) {
            Model m;
            Context c;
            check(zinn_model_load(model_path.c_str(), &m.p));
            check(zinn_context_load(manifest.c_str(), &c.p));
            json req{{"lat", lat}, {"lon", lon}, {"datetime", datetime}, {"length", length}, {"width", width},
                     {"multi_vortex", multi_vortex}};
            if (duration_opt->count()) req["duration"] = duration;
            if (!overrides.empty()) {
                json o = json::object();
                for (const auto& kv : overrides) {
                    const auto eq = kv.find('=');
                    char* end = nullptr;
                    const double v = eq == std::string::npos ? 0.0 : std::strtod(kv.c_str() + eq + 1, &end);
                    if (eq == std::string::npos || end == kv.c_str() + eq + 1 || *end != '\0') {
                        std::cerr << "error: --set expects name=value, got '" << kv << "'\n";
                        return 2;
                    }
                    o[kv.substr(0, eq)] = v;
                }
                req["overrides"] = o;
            }
            int status = 0;
            OwnedString response;
            check(zinn_predict_request(m.p, c.p, req.dump().c_str(), &status, &response.p));
            if (status != 200) {
                std::cerr << "error: request rejected (" << status << "): " << response.str() << '\n';
                return 1;
            }
            std::cout << response.str() << '\n';
        } else if (*serve) {
            Model m;
            Context c;
            check(zinn_model_load(model_path.c_str(), &m.p));
            check(zinn_context_load(manifest.c_str(), &c.p));
            std::cerr << "serving on " << host << ":" << port << " (ZINN_BIND overrides)\n";
            check(zinn_serve(m.p, c.p, host.c_str(), port, grid_dir.empty() ? nullptr : grid_dir.c_str()));
        } else if (*demo) {
            OwnedString report;
            check(zinn_demo_fig1(demo_seed, &report.p));
            if (!demo_out.empty()) write_text(demo_out, report.str());
            std::cout << report.str();
        }
    } catch (const Failure&) {
        return 1;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
