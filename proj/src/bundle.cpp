#include "bundle.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <zlib.h>

#include "error.hpp"

namespace zinn {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'Z', 'I', 'N', 'N', 'B', 'N', 'D', 'L'};
constexpr std::size_t kHeaderSize = 8 + 4 + 4 + 8;

template <typename T>
void put_le(std::string& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t at) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<T>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    }
    return v;
}

std::uint32_t crc(const std::string& s, std::size_t at, std::size_t n) {
    return static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(s.data() + at), static_cast<uInt>(n)));
}

json hex_array(std::span<const double> v) {
    json a = json::array();
    for (double x : v) a.push_back(hex_double(x));
    return a;
}

std::vector<double> from_hex_array(const json& a) {
    std::vector<double> v;
    v.reserve(a.size());
    for (const auto& x : a) v.push_back(parse_hex_double(x.get<std::string>()));
    return v;
}

json transform_to(const TransformSpec& t) {
    return {{"kind", std::string(to_string(t.kind))}, {"mean", hex_double(t.mean)}, {"sd", hex_double(t.sd)}};
}

TransformSpec transform_from(const json& j) {
    return {transform_kind_from_string(j.at("kind").get<std::string>()),
            parse_hex_double(j.at("mean").get<std::string>()), parse_hex_double(j.at("sd").get<std::string>())};
}

json network_to(const NetworkSpec& s, const NetworkParams& p) {
    return {{"input", s.input},
            {"hidden", s.hidden},
            {"hidden_activation", to_string(s.hidden_activation)},
            {"output_activation", to_string(s.output_activation)},
            {"dropout", hex_double(s.dropout)},
            {"l2", hex_double(s.l2)},
            {"params", hex_array(p.values)}};
}

void network_from(const json& j, NetworkSpec& s, NetworkParams& p) {
    s.input = j.at("input").get<std::size_t>();
    s.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    s.hidden_activation = activation_from_string(j.at("hidden_activation").get<std::string>());
    s.output_activation = activation_from_string(j.at("output_activation").get<std::string>());
    s.dropout = parse_hex_double(j.at("dropout").get<std::string>());
    s.l2 = parse_hex_double(j.at("l2").get<std::string>());
    p.values = from_hex_array(j.at("params"));
}

json column_to(const ColumnDescriptor& c) {
    json o{{"name", c.name},
           {"variable", c.variable},
           {"source", to_string(c.source)},
           {"role", to_string(c.role)},
           {"transform", transform_to(c.transform)},
           {"unit", c.unit}};
    if (c.spline) {
        o["spline"] = {{"degree", c.spline->degree},
                       {"interior_knots", c.spline->interior_knots},
                       {"lo", hex_double(c.spline->lo)},
                       {"hi", hex_double(c.spline->hi)},
                       {"basis_index", c.basis_index}};
    }
    return o;
}

ColumnDescriptor column_from(const json& o) {
    ColumnDescriptor c;
    c.name = o.at("name").get<std::string>();
    c.variable = o.at("variable").get<std::string>();
    c.source = source_from_string(o.at("source").get<std::string>());
    c.role = role_from_string(o.at("role").get<std::string>());
    c.transform = transform_from(o.at("transform"));
    c.unit = o.at("unit").get<std::string>();
    if (o.contains("spline")) {
        const auto& s = o.at("spline");
        c.spline = SplineBasisSpec{s.at("degree").get<int>(), s.at("interior_knots").get<int>(),
                                   parse_hex_double(s.at("lo").get<std::string>()),
                                   parse_hex_double(s.at("hi").get<std::string>())};
        c.basis_index = s.at("basis_index").get<int>();
    }
    return c;
}

}  // namespace

std::string hex_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
    return std::string(buf, r.ptr);
}

double parse_hex_double(const std::string& s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        fail(ErrorCode::CorruptBundle, "bad hexadecimal number '" + s + "'");
    }
    return v;
}

std::string bundle_timestamp() {
    std::time_t t = std::time(nullptr);
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) {
        char* end = nullptr;
        const long long v = std::strtoll(sde, &end, 10);
        if (end && *end == '\0') t = static_cast<std::time_t>(v);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string serialize_bundle(const ModelBundle& b) {
    b.model.validate();
    json j;
    j["created"] = b.created;
    j["classifier"] = network_to(b.model.classifier_spec, b.model.classifier);
    j["conditional"] = network_to(b.model.conditional_spec, b.model.conditional);
    j["outcome"] = transform_to(b.model.outcome);
    j["columns"] = json::array();
    for (const auto& c : b.model.columns) j["columns"].push_back(column_to(c));
    j["natural_means"] = json::object();
    for (const auto& [k, v] : b.natural_means) j["natural_means"][k] = hex_double(v);
    j["roster"] = json::parse(roster_to_json(b.roster));
    j["feature_config"] = json::parse(feature_config_to_json(b.config));
    j["metadata"] = json::parse(b.metadata);
    const auto payload = j.dump();

    std::string out(kMagic, sizeof kMagic);
    put_le<std::uint32_t>(out, b.version);
    put_le<std::uint32_t>(out, 0);
    put_le<std::uint64_t>(out, payload.size());
    out += payload;
    put_le<std::uint32_t>(out, crc(out, kHeaderSize, payload.size()));
    return out;
}

ModelBundle deserialize_bundle(const std::string& bytes) {
    if (bytes.size() < kHeaderSize + 4 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        fail(ErrorCode::CorruptBundle, "not a model bundle or truncated header");
    }
    ModelBundle b;
    b.version = get_le<std::uint32_t>(bytes, 8);
    if (b.version != kBundleVersion) {
        fail(ErrorCode::VersionMismatch, "bundle version " + std::to_string(b.version) + " is not supported (expected " +
                                             std::to_string(kBundleVersion) + ")");
    }
    const auto size = get_le<std::uint64_t>(bytes, 16);
    if (size != bytes.size() - kHeaderSize - 4) fail(ErrorCode::CorruptBundle, "payload size does not match file size");
    if (crc(bytes, kHeaderSize, size) != get_le<std::uint32_t>(bytes, kHeaderSize + size)) {
        fail(ErrorCode::CorruptBundle, "checksum mismatch");
    }
    try {
        const json j = json::parse(bytes.begin() + kHeaderSize, bytes.begin() + static_cast<std::ptrdiff_t>(kHeaderSize + size));
        b.created = j.at("created").get<std::string>();
        network_from(j.at("classifier"), b.model.classifier_spec, b.model.classifier);
        network_from(j.at("conditional"), b.model.conditional_spec, b.model.conditional);
        b.model.outcome = transform_from(j.at("outcome"));
        for (const auto& c : j.at("columns")) b.model.columns.push_back(column_from(c));
        for (auto& [k, v] : j.at("natural_means").items()) b.natural_means[k] = parse_hex_double(v.get<std::string>());
        b.roster = roster_from_json(j.at("roster").dump());
        b.config = feature_config_from_json(j.at("feature_config").dump());
        b.metadata = j.at("metadata").dump();
        b.model.validate();
    } catch (const json::exception& e) {
        fail(ErrorCode::CorruptBundle, std::string("bundle payload: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::CorruptBundle) throw;
        fail(ErrorCode::CorruptBundle, std::string("bundle payload: ") + e.what());
    }
    return b;
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
    const auto bytes = serialize_bundle(bundle);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_bundle(ss.str());
}

}  // namespace zinn
