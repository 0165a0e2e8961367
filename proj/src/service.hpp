#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bundle.hpp"
#include "dataset.hpp"

namespace zinn {

struct PredictRequest {
    double lat = 0.0;
    double lon = 0.0;
    DateTime datetime;
    double length = 0.0;
    double width = 0.0;
    std::optional<double> duration;  // absent: training mean
    bool multi_vortex = false;
    std::map<std::string, double> overrides;  // natural scale, by roster variable
};

struct HttpResult {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

// Throws InvalidArgument for malformed bodies (unknown fields included).
PredictRequest parse_predict_request(const std::string& body);

struct EncodedRequest {
    std::vector<double> features;
    NaturalRecord natural;
};

// Throws RosterMismatch naming unknown overrides or features that could not
// be derived for the location.
EncodedRequest encode_request(const ModelBundle& bundle, const LocationContext& context, const PredictRequest& request);

// Full request cycle without a socket: 200, 400 or 422.
HttpResult handle_predict(const ModelBundle& bundle, const LocationContext& context, const std::string& body);
HttpResult handle_model(const ModelBundle& bundle);
HttpResult handle_grid(const std::filesystem::path& grid_dir, int year, int month);

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path grid_dir;
};

// "host:port" from ZINN_BIND, when set, replaces the options' address.
ServeOptions apply_bind_override(ServeOptions options);

// HTTP front end over an immutable bundle and context.
class Service {
public:
    Service(const ModelBundle& bundle, const LocationContext& context, std::filesystem::path grid_dir);
    ~Service();

    // Binds (port 0 picks a free port) and returns the port.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Binds and blocks.
void serve(const ModelBundle& bundle, const LocationContext& context, const ServeOptions& options);

}  // namespace zinn
