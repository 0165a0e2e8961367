#include "inflation.hpp"

#include <cstdio>

#include "csv.hpp"
#include "error.hpp"

namespace zinn {

std::string YearMonth::str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

YearMonth parse_year_month(const std::string& text) {
    const std::string t = csv::trim(text);
    if (t.size() != 7 || t[4] != '-') {
        fail(ErrorCode::InvalidArgument, "expected YYYY-MM, got '" + t + "'");
    }
    const auto y = csv::parse_integer(t.substr(0, 4));
    const auto m = csv::parse_integer(t.substr(5, 2));
    if (!y || !m || *m < 1 || *m > 12) {
        fail(ErrorCode::InvalidArgument, "expected YYYY-MM, got '" + t + "'");
    }
    return {static_cast<int>(*y), static_cast<int>(*m)};
}

double CpiSeries::at(YearMonth ym) const {
    const auto it = index.find(ym);
    if (it == index.end()) fail(ErrorCode::MissingCpiMonth, "no CPI value for " + ym.str());
    return it->second;
}

CpiSeries read_cpi(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    CpiSeries cpi;
    auto add = [&](const std::vector<std::string>& row, std::size_t line) {
        if (row.size() < 2) {
            fail(ErrorCode::SchemaMismatch, path.string() + ": expected two columns on line " + std::to_string(line));
        }
        const auto v = csv::parse_number(row[1]);
        if (!v || !(*v > 0.0)) {
            fail(ErrorCode::SchemaMismatch, path.string() + ": CPI must be positive on line " + std::to_string(line));
        }
        cpi.index[parse_year_month(row[0])] = *v;
    };
    // The first line is data when it already looks like YYYY-MM,value.
    if (table.header.size() >= 2 && csv::parse_number(table.header[1])) add(table.header, 1);
    for (std::size_t i = 0; i < table.rows.size(); ++i) add(table.rows[i], table.lines[i]);
    if (cpi.index.empty()) fail(ErrorCode::EmptyFile, path.string() + ": no CPI rows");
    return cpi;
}

double adjust_inflation(double amount_usd, YearMonth event_month, const CpiSeries& cpi, YearMonth reference) {
    if (!(amount_usd >= 0.0)) fail(ErrorCode::InvalidArgument, "damage amount must be >= 0");
    return amount_usd * cpi.at(reference) / cpi.at(event_month);
}

}  // namespace zinn
