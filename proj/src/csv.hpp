#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zinn::csv {

struct Table {
    std::vector<std::string> header;
    // Records keep their 1-based source line for reject reports.
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;

    // Index of a header column, or nullopt.
    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t require(std::string_view name) const;
};

// RFC 4180 style: comma separated, double-quoted fields may contain commas,
// newlines and doubled quotes. Lines starting with '#' before the header are
// skipped. Throws EmptyFile when there is no header line.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text);

std::string quote(std::string_view field);

// Strict parse: whole field must be consumed. "NA" and "" yield nullopt.
std::optional<double> parse_number(std::string_view field);
std::optional<long long> parse_integer(std::string_view field);

// Shortest text that parses back to exactly the same double.
std::string format_number(double value);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delimiter);

}  // namespace zinn::csv
