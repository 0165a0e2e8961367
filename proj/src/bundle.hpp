#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "features.hpp"
#include "grid.hpp"
#include "model.hpp"

namespace zinn {

constexpr std::uint32_t kBundleVersion = 1;

struct ModelBundle {
    std::uint32_t version = kBundleVersion;
    std::string created;  // ISO-8601 UTC
    ZeroInflatedModel model;
    std::map<std::string, double> natural_means;
    std::vector<VariableDescriptor> roster;
    FeatureConfig config;
    std::string metadata = "{}";  // JSON object: seeds, training config, metric reports

    ScenarioEncoder encoder() const { return {model.columns, natural_means}; }
};

// UTC time from SOURCE_DATE_EPOCH when set, else the current time.
std::string bundle_timestamp();

// Layout, little-endian:
//   "ZINNBNDL" | u32 version | u32 reserved (0) | u64 payload size |
//   payload (UTF-8 JSON) | u32 CRC-32 of the payload
// Doubles in the payload are C99 hexadecimal strings, so they round trip
// exactly.
std::string serialize_bundle(const ModelBundle& bundle);
ModelBundle deserialize_bundle(const std::string& bytes);  // VersionMismatch, CorruptBundle

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& path);

// Exact text form of a double and back.
std::string hex_double(double v);
double parse_hex_double(const std::string& s);

}  // namespace zinn
