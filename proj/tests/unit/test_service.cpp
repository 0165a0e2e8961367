#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <future>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "check.hpp"
#include "grid.hpp"
#include "service.hpp"
#include "synthetic.hpp"

using namespace zinn;
using nlohmann::json;
using zinn::testing::error_code;

namespace {

zinn::testing::SampleModel& sample() {
    static auto m = zinn::testing::make_sample_model(zinn::testing::scratch_dir("service"), 2);
    return m;
}

json base_request() {
    return {{"lat", 36.4}, {"lon", -97.6}, {"datetime", "2017-05-20T16:30:00"}, {"length", 3.0}, {"width", 150.0}};
}

HttpResult post(const json& body) {
    auto& m = sample();
    return handle_predict(m.bundle, *m.context, body.dump());
}

}  // namespace

TEST_CASE("predict returns the zero-inflated combination", "[service]") {
    const auto r = post(base_request());
    REQUIRE(r.status == 200);
    const auto j = json::parse(r.body);
    const double p = j["p_damage"];
    const double c = j["conditional_usd"];
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(c >= 0.0);
    CHECK(j["expected_usd"].get<double>() == p * c);
    CHECK(j["damage_flag"].get<bool>() == (p >= 0.5));
    CHECK(j["features"].size() == sample().bundle.model.columns.size());

    // Same answer as the library path.
    auto& m = sample();
    const auto enc = encode_request(m.bundle, *m.context, parse_predict_request(base_request().dump()));
    CHECK(predict(m.bundle.model, enc.features).p_damage == p);
}

TEST_CASE("predict request validation", "[service]") {
    auto with = [](const char* key, json value) {
        auto b = base_request();
        b[key] = std::move(value);
        return b;
    };
    auto without = [](const char* key) {
        auto b = base_request();
        b.erase(key);
        return b;
    };
    CHECK(post(without("lat")).status == 400);
    CHECK(post(without("width")).status == 400);
    CHECK(post(with("lat", 91.0)).status == 400);
    CHECK(post(with("lon", "west")).status == 400);
    CHECK(post(with("length", -1.0)).status == 400);
    CHECK(post(with("duration", -5.0)).status == 400);
    CHECK(post(with("multi_vortex", 1)).status == 400);
    CHECK(post(with("datetime", "2017-13-40")).status == 400);
    CHECK(post(with("colour", "red")).status == 400);
    CHECK(post(with("overrides", json::array())).status == 400);
    auto& m = sample();
    CHECK(handle_predict(m.bundle, *m.context, "{not json").status == 400);
    CHECK(handle_predict(m.bundle, *m.context, "[1,2]").status == 400);

    const auto bad = post(with("overrides", {{"made_up", 1.0}, {"other_thing", 2.0}}));
    REQUIRE(bad.status == 422);
    const auto j = json::parse(bad.body);
    CHECK(j["names"] == json::array({"made_up", "other_thing"}));

    // Outside the land-cover coverage.
    auto far = base_request();
    far["lat"] = 45.0;
    far["lon"] = -80.0;
    CHECK(post(far).status == 422);
}

TEST_CASE("optional fields and overrides change the encoding", "[service]") {
    auto& m = sample();
    const auto plain = encode_request(m.bundle, *m.context, parse_predict_request(base_request().dump()));
    auto b = base_request();
    b["duration"] = 600.0;
    b["multi_vortex"] = true;
    const auto full = encode_request(m.bundle, *m.context, parse_predict_request(b.dump()));
    CHECK(full.natural.at("tornado_duration") == 600.0);
    CHECK(full.natural.at("multi_vortex") == 1.0);
    CHECK(plain.natural.at("multi_vortex") == 0.0);
    CHECK(full.features != plain.features);

    b = base_request();
    b["overrides"] = {{"median_home_value", 250000.0}};
    const auto o = encode_request(m.bundle, *m.context, parse_predict_request(b.dump()));
    CHECK(o.natural.at("median_home_value") == 250000.0);
}

TEST_CASE("model and grid endpoints", "[service]") {
    auto& m = sample();
    const auto r = handle_model(m.bundle);
    REQUIRE(r.status == 200);
    const auto j = json::parse(r.body);
    CHECK(j["version"] == kBundleVersion);
    CHECK(j["created"] == "2020-01-01T00:00:00Z");
    CHECK(j["columns"].size() == m.bundle.model.columns.size());
    CHECK(j["roster"].size() == m.bundle.roster.size());
    CHECK(j["metadata"]["source"] == "sample");
    CHECK(j["classifier"]["parameters"].get<std::size_t>() == m.bundle.model.classifier_spec.parameter_count());

    const auto dir = zinn::testing::scratch_dir("service-grid");
    CHECK(handle_grid(dir, 2019, 5).status == 404);
    CHECK(handle_grid(dir, 2019, 13).status == 404);
    CHECK(handle_grid({}, 2019, 5).status == 404);
    GridRunOptions o;
    o.boundary = m.paths.boundary;
    o.months = {5};
    o.out_dir = dir;
    o.bounds = {-100, -96, 35, 38, 1.0};
    run_grid(m.bundle.model, m.bundle.encoder(), *m.context, o);
    const auto g = handle_grid(dir, 2019, 5);
    REQUIRE(g.status == 200);
    CHECK(g.content_type == "application/geo+json");
    CHECK(json::parse(g.body)["type"] == "FeatureCollection");
}

TEST_CASE("bind address override", "[service]") {
    ServeOptions o;
    ::unsetenv("ZINN_BIND");
    CHECK(apply_bind_override(o).port == 8080);
    ::setenv("ZINN_BIND", "0.0.0.0:9191", 1);
    const auto b = apply_bind_override(o);
    CHECK(b.host == "0.0.0.0");
    CHECK(b.port == 9191);
    ::setenv("ZINN_BIND", "nonsense", 1);
    CHECK(error_code([&] { apply_bind_override(o); }) == ErrorCode::InvalidArgument);
    ::setenv("ZINN_BIND", "host:99999", 1);
    CHECK(error_code([&] { apply_bind_override(o); }) == ErrorCode::InvalidArgument);
    ::unsetenv("ZINN_BIND");
}

TEST_CASE("HTTP front end", "[service]") {
    auto& m = sample();
    Service service(m.bundle, *m.context, {});
    const int port = service.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread server([&] { service.listen(); });

    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(30, 0);
    const auto health = client.Get("/healthz");
    REQUIRE(health);
    CHECK(health->status == 200);

    const auto model = client.Get("/api/v1/model");
    REQUIRE(model);
    CHECK(model->status == 200);
    CHECK(model->body == handle_model(m.bundle).body);

    CHECK(client.Get("/api/v1/grid/2019/5")->status == 404);
    CHECK(client.Post("/api/v1/predict", "{", "application/json")->status == 400);

    const auto body = base_request().dump();
    const auto expected = handle_predict(m.bundle, *m.context, body).body;
    std::vector<std::future<std::string>> calls;
    for (int i = 0; i < 8; ++i) {
        calls.push_back(std::async(std::launch::async, [&] {
            httplib::Client c("127.0.0.1", port);
            c.set_read_timeout(30, 0);
            const auto r = c.Post("/api/v1/predict", body, "application/json");
            return r && r->status == 200 ? r->body : std::string("failed");
        }));
    }
    for (auto& f : calls) CHECK(f.get() == expected);

    service.stop();
    server.join();
}
