#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <string>

namespace zinn {

struct YearMonth {
    int year = 0;
    int month = 0;

    auto operator<=>(const YearMonth&) const = default;
    std::string str() const;
};

// Parses "YYYY-MM".
YearMonth parse_year_month(const std::string& text);

struct CpiSeries {
    std::map<YearMonth, double> index;

    double at(YearMonth ym) const;  // throws MissingCpiMonth
};

// Two columns, "YYYY-MM,index", optional header line; index values must be > 0.
CpiSeries read_cpi(const std::filesystem::path& path);

inline constexpr YearMonth kCpiReference{2018, 1};

// amount * cpi(reference) / cpi(event month).
double adjust_inflation(double amount_usd, YearMonth event_month, const CpiSeries& cpi,
                        YearMonth reference = kCpiReference);

}  // namespace zinn
