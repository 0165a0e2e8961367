#include "service.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "error.hpp"
#include "model.hpp"

namespace zinn {

using nlohmann::json;

namespace {

const std::set<std::string> kRequestFields = {"lat",      "lon",          "datetime", "length",
                                              "width",    "duration",     "multi_vortex", "overrides"};

double number_field(const json& j, const char* name) {
    const auto& v = j.at(name);
    if (!v.is_number()) fail(ErrorCode::InvalidArgument, std::string("field '") + name + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(ErrorCode::InvalidArgument, std::string("field '") + name + "' must be finite");
    return x;
}

json error_body(const std::string& message, const std::vector<std::string>& names = {}) {
    json j{{"error", message}};
    if (!names.empty()) j["names"] = names;
    return j;
}

}  // namespace

PredictRequest parse_predict_request(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) fail(ErrorCode::InvalidArgument, "request body must be a JSON object");
    for (auto& [key, _] : j.items()) {
        if (!kRequestFields.count(key)) fail(ErrorCode::InvalidArgument, "unknown field '" + key + "'");
    }
    for (const char* name : {"lat", "lon", "datetime", "length", "width"}) {
        if (!j.contains(name)) fail(ErrorCode::InvalidArgument, std::string("missing field '") + name + "'");
    }
    PredictRequest r;
    r.lat = number_field(j, "lat");
    r.lon = number_field(j, "lon");
    if (r.lat < -90.0 || r.lat > 90.0) fail(ErrorCode::InvalidArgument, "lat out of range");
    if (r.lon < -180.0 || r.lon > 180.0) fail(ErrorCode::InvalidArgument, "lon out of range");
    if (!j.at("datetime").is_string()) fail(ErrorCode::InvalidArgument, "field 'datetime' must be a string");
    r.datetime = parse_datetime(j.at("datetime").get<std::string>());
    r.length = number_field(j, "length");
    r.width = number_field(j, "width");
    if (r.length < 0.0 || r.width < 0.0) fail(ErrorCode::InvalidArgument, "length and width must be >= 0");
    if (j.contains("duration") && !j.at("duration").is_null()) {
        r.duration = number_field(j, "duration");
        if (*r.duration < 0.0) fail(ErrorCode::InvalidArgument, "duration must be >= 0");
    }
    if (j.contains("multi_vortex")) {
        if (!j.at("multi_vortex").is_boolean()) fail(ErrorCode::InvalidArgument, "field 'multi_vortex' must be a boolean");
        r.multi_vortex = j.at("multi_vortex").get<bool>();
    }
    if (j.contains("overrides")) {
        const auto& o = j.at("overrides");
        if (!o.is_object()) fail(ErrorCode::InvalidArgument, "field 'overrides' must be an object");
        for (auto& [key, value] : o.items()) {
            if (!value.is_number() || !std::isfinite(value.get<double>())) {
                fail(ErrorCode::InvalidArgument, "override '" + key + "' must be a finite number");
            }
            r.overrides[key] = value.get<double>();
        }
    }
    return r;
}

EncodedRequest encode_request(const ModelBundle& bundle, const LocationContext& context, const PredictRequest& req) {
    std::set<std::string> known;
    for (const auto& v : bundle.roster) known.insert(v.name);
    std::vector<std::string> unknown;
    for (const auto& [name, _] : req.overrides) {
        if (!known.count(name)) unknown.push_back(name);
    }
    if (!unknown.empty()) {
        std::string list;
        for (const auto& u : unknown) list += (list.empty() ? "" : ", ") + u;
        fail(ErrorCode::RosterMismatch, "unknown override: " + list);
    }

    auto loc = context.extract({req.lat, req.lon}, req.datetime.year);
    NaturalRecord rec = std::move(loc.values);
    rec["tornado_length"] = req.length;
    rec["tornado_width"] = req.width;
    rec["tornado_area"] = req.length * req.width;
    rec["multi_vortex"] = req.multi_vortex ? 1.0 : 0.0;
    rec["begin_time"] = req.datetime.minutes_since_midnight();
    rec["year"] = static_cast<double>(req.datetime.year);
    rec["day_of_year"] = static_cast<double>(req.datetime.day_of_year());
    if (req.duration) rec["tornado_duration"] = *req.duration;
    for (const auto& [name, value] : req.overrides) rec[name] = value;
    derive_mixed_features(rec);
    if (auto it = req.overrides.find("total_income_estimate"); it != req.overrides.end()) {
        rec["total_income_estimate"] = it->second;
    }

    std::set<std::string> at_mean;
    if (!req.duration && !req.overrides.count("tornado_duration")) at_mean.insert("tornado_duration");

    // Missing location features are only fatal when the model uses them.
    std::vector<std::string> missing;
    for (const auto& c : bundle.model.columns) {
        if (at_mean.count(c.variable)) continue;
        const auto it = rec.find(c.variable);
        if ((it == rec.end() || std::isnan(it->second)) &&
            (missing.empty() || missing.back() != c.variable)) {
            missing.push_back(c.variable);
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        const auto why = loc.missing_reason.empty() ? std::string() : " (" + loc.missing_reason + ")";
        fail(ErrorCode::RosterMismatch, "features unavailable at this location: " + list + why);
    }
    EncodedRequest out;
    out.features = bundle.encoder().encode(rec, at_mean);
    out.natural = std::move(rec);
    return out;
}

HttpResult handle_predict(const ModelBundle& bundle, const LocationContext& context, const std::string& body) {
    PredictRequest req;
    try {
        req = parse_predict_request(body);
    } catch (const Error& e) {
        return {400, error_body(e.what()).dump()};
    }
    try {
        const auto enc = encode_request(bundle, context, req);
        const auto d = predict(bundle.model, enc.features);
        json features = json::array();
        for (std::size_t j = 0; j < enc.features.size(); ++j) {
            features.push_back({{"name", bundle.model.columns[j].name}, {"value", enc.features[j]}});
        }
        json out{{"p_damage", d.p_damage},
                 {"conditional_transformed", d.conditional_transformed},
                 {"conditional_usd", d.conditional_usd},
                 {"expected_usd", d.expected_usd},
                 {"damage_flag", d.damage_flag},
                 {"floored", d.floored},
                 {"features", std::move(features)}};
        return {200, out.dump()};
    } catch (const Error& e) {
        if (e.code() == ErrorCode::RosterMismatch) {
            std::vector<std::string> names;
            for (const auto& [name, _] : req.overrides) {
                if (std::none_of(bundle.roster.begin(), bundle.roster.end(),
                                 [&](const auto& v) { return v.name == name; })) {
                    names.push_back(name);
                }
            }
            return {422, error_body(e.what(), names).dump()};
        }
        if (e.code() == ErrorCode::NegativeInput || e.code() == ErrorCode::DomainViolation ||
            e.code() == ErrorCode::NotFound) {
            return {422, error_body(e.what()).dump()};
        }
        return {500, error_body(e.what()).dump()};
    }
}

HttpResult handle_model(const ModelBundle& b) {
    auto net = [](const NetworkSpec& s) {
        return json{{"architecture", s.architecture()},
                    {"hidden", s.hidden},
                    {"dropout", s.dropout},
                    {"l2", s.l2},
                    {"parameters", s.parameter_count()}};
    };
    json roster = json::array();
    for (const auto& v : b.roster) {
        roster.push_back({{"name", v.name},
                          {"label", v.label},
                          {"source", to_string(v.source)},
                          {"role", to_string(v.role)},
                          {"unit", v.unit}});
    }
    json columns = json::array();
    for (const auto& c : b.model.columns) columns.push_back(c.name);
    json out{{"version", b.version},
             {"created", b.created},
             {"classifier", net(b.model.classifier_spec)},
             {"conditional", net(b.model.conditional_spec)},
             {"columns", std::move(columns)},
             {"roster", std::move(roster)},
             {"metadata", json::parse(b.metadata)}};
    return {200, out.dump()};
}

HttpResult handle_grid(const std::filesystem::path& grid_dir, int year, int month) {
    if (month < 1 || month > 12 || grid_dir.empty()) {
        return {404, error_body("no grid for " + std::to_string(year) + "-" + std::to_string(month)).dump()};
    }
    const auto path = grid_dir / std::to_string(year) / (std::to_string(month) + ".geojson");
    std::ifstream in(path, std::ios::binary);
    if (!in) return {404, error_body("no grid for " + std::to_string(year) + "-" + std::to_string(month)).dump()};
    std::ostringstream ss;
    ss << in.rdbuf();
    return {200, ss.str(), "application/geo+json"};
}

ServeOptions apply_bind_override(ServeOptions options) {
    const char* bind = std::getenv("ZINN_BIND");
    if (!bind || !*bind) return options;
    const std::string s(bind);
    const auto colon = s.rfind(':');
    if (colon == std::string::npos) fail(ErrorCode::InvalidArgument, "ZINN_BIND must be host:port");
    const auto digits = s.substr(colon + 1);
    int port = -1;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (colon == 0 || ec != std::errc() || end != digits.data() + digits.size() || port < 0 || port > 65535) {
        fail(ErrorCode::InvalidArgument, "ZINN_BIND must be host:port");
    }
    options.host = s.substr(0, colon);
    options.port = port;
    return options;
}

// ---------------------------------------------------------------------------

struct Service::Impl {
    const ModelBundle& bundle;
    const LocationContext& context;
    std::filesystem::path grid_dir;
    httplib::Server server;

    static void reply(httplib::Response& res, const HttpResult& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    }
};

Service::Service(const ModelBundle& bundle, const LocationContext& context, std::filesystem::path grid_dir)
    : impl_(new Impl{bundle, context, std::move(grid_dir), {}}) {
    auto* impl = impl_.get();
    impl->server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });
    impl->server.Post("/api/v1/predict", [impl](const httplib::Request& req, httplib::Response& res) {
        Impl::reply(res, handle_predict(impl->bundle, impl->context, req.body));
    });
    impl->server.Get("/api/v1/model", [impl](const httplib::Request&, httplib::Response& res) {
        Impl::reply(res, handle_model(impl->bundle));
    });
    impl->server.Get(R"(/api/v1/grid/(\d{1,4})/(\d{1,2}))", [impl](const httplib::Request& req, httplib::Response& res) {
        Impl::reply(res, handle_grid(impl->grid_dir, std::stoi(req.matches[1]), std::stoi(req.matches[2])));
    });
    impl->server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) res.set_content(error_body("not found").dump(), "application/json");
    });
}

Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) fail(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

void serve(const ModelBundle& bundle, const LocationContext& context, const ServeOptions& options) {
    const auto o = apply_bind_override(options);
    Service service(bundle, context, o.grid_dir);
    service.bind(o.host, o.port);
    service.listen();
}

}  // namespace zinn
