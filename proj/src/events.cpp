#include "events.hpp"

#include <cstdio>
#include <fstream>
#include <tuple>

#include "csv.hpp"
#include "error.hpp"

namespace zinn {

bool is_leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int DateTime::day_of_year() const {
    static constexpr int kCumulative[] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
    return kCumulative[month - 1] + day + (month > 2 && is_leap_year(year) ? 1 : 0);
}

bool DateTime::operator<(const DateTime& o) const {
    return std::tie(year, month, day, hour, minute, second) <
           std::tie(o.year, o.month, o.day, o.hour, o.minute, o.second);
}

DateTime parse_datetime(const std::string& text) {
    const std::string t = csv::trim(text);
    DateTime dt;
    int consumed = 0;
    const int fields = std::sscanf(t.c_str(), "%4d-%2d-%2d%n", &dt.year, &dt.month, &dt.day, &consumed);
    if (fields != 3) fail(ErrorCode::InvalidArgument, "bad date '" + t + "'");
    std::size_t pos = static_cast<std::size_t>(consumed);
    if (pos < t.size()) {
        if (t[pos] != 'T' && t[pos] != ' ') fail(ErrorCode::InvalidArgument, "bad date-time '" + t + "'");
        const char* rest = t.c_str() + pos + 1;
        int n = 0;
        if (std::sscanf(rest, "%2d:%2d:%2d%n", &dt.hour, &dt.minute, &dt.second, &n) != 3) {
            dt.second = 0;
            n = 0;
            if (std::sscanf(rest, "%2d:%2d%n", &dt.hour, &dt.minute, &n) != 2) {
                fail(ErrorCode::InvalidArgument, "bad time in '" + t + "'");
            }
        }
        pos += 1 + static_cast<std::size_t>(n);
        if (pos != t.size()) fail(ErrorCode::InvalidArgument, "trailing text in '" + t + "'");
    }
    static constexpr int kDays[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (dt.month < 1 || dt.month > 12 || dt.day < 1 || dt.day > kDays[dt.month - 1] ||
        (dt.month == 2 && dt.day == 29 && !is_leap_year(dt.year)) || dt.hour < 0 || dt.hour > 23 ||
        dt.minute < 0 || dt.minute > 59 || dt.second < 0 || dt.second > 59) {
        fail(ErrorCode::InvalidArgument, "date-time out of range '" + t + "'");
    }
    return dt;
}

namespace {

IngestResult ingest_table(const csv::Table& table, const StudyWindow& window) {
    const auto c_id = table.require("event_id");
    const auto c_lat = table.require("begin_lat");
    const auto c_lon = table.require("begin_lon");
    const auto c_dt = table.require("begin_datetime");
    const auto c_dur = table.require("duration_s");
    const auto c_len = table.require("length");
    const auto c_wid = table.require("width");
    const auto c_dmg = table.require("damage_usd");
    const auto c_nar = table.require("narrative");

    IngestResult out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = table.lines[r];
        auto reject = [&](const std::string& reason) {
            out.rejects.push_back({line, c_id < row.size() ? row[c_id] : std::string(), reason});
        };
        if (row.size() != table.header.size()) {
            reject("expected " + std::to_string(table.header.size()) + " fields, got " +
                   std::to_string(row.size()));
            continue;
        }
        TornadoEvent e;
        e.id = row[c_id];
        e.narrative = row[c_nar];
        const auto lat = csv::parse_number(row[c_lat]);
        const auto lon = csv::parse_number(row[c_lon]);
        const auto dur = csv::parse_number(row[c_dur]);
        const auto len = csv::parse_number(row[c_len]);
        const auto wid = csv::parse_number(row[c_wid]);
        const auto dmg = csv::parse_number(row[c_dmg]);
        if (e.id.empty()) { reject("missing event id"); continue; }
        if (!lat) { reject("lat not a number"); continue; }
        if (!lon) { reject("lon not a number"); continue; }
        if (*lat < -90.0 || *lat > 90.0) { reject("lat out of range"); continue; }
        if (*lon < -180.0 || *lon > 180.0) { reject("lon out of range"); continue; }
        if (!dur || *dur < 0.0) { reject("duration missing or negative"); continue; }
        if (!len || *len < 0.0) { reject("length missing or negative"); continue; }
        if (!wid || *wid < 0.0) { reject("width missing or negative"); continue; }
        if (!dmg) { reject("damage not a number"); continue; }
        if (*dmg < 0.0) { reject("damage negative"); continue; }
        try {
            e.begin = parse_datetime(row[c_dt]);
        } catch (const Error& err) {
            reject(err.what());
            continue;
        }
        if (e.begin < window.first || window.last < e.begin) {
            reject("date outside study window");
            continue;
        }
        e.begin_lat = *lat;
        e.begin_lon = *lon;
        e.duration_s = *dur;
        e.length = *len;
        e.width = *wid;
        e.damage_usd = *dmg;
        out.events.push_back(std::move(e));
    }
    return out;
}

}  // namespace

IngestResult parse_events(const std::string& text, const StudyWindow& window) {
    const auto table = csv::parse(text);
    if (table.rows.empty()) fail(ErrorCode::EmptyFile, "events file has no rows");
    return ingest_table(table, window);
}

IngestResult ingest_events(const std::filesystem::path& path, const StudyWindow& window) {
    const auto table = csv::read(path);
    if (table.rows.empty()) fail(ErrorCode::EmptyFile, path.string() + ": events file has no rows");
    try {
        return ingest_table(table, window);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void write_events(const std::filesystem::path& path, const std::vector<TornadoEvent>& events) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << "event_id,begin_lat,begin_lon,begin_datetime,duration_s,length,width,damage_usd,narrative\n";
    char dt[32];
    for (const auto& e : events) {
        std::snprintf(dt, sizeof dt, "%04d-%02d-%02dT%02d:%02d:%02d", e.begin.year, e.begin.month,
                      e.begin.day, e.begin.hour, e.begin.minute, e.begin.second);
        out << csv::quote(e.id) << ',' << csv::format_number(e.begin_lat) << ','
            << csv::format_number(e.begin_lon) << ',' << dt << ',' << csv::format_number(e.duration_s)
            << ',' << csv::format_number(e.length) << ',' << csv::format_number(e.width) << ','
            << csv::format_number(e.damage_usd) << ',' << csv::quote(e.narrative) << '\n';
    }
}

void write_rejects(const std::filesystem::path& path, const std::vector<EventReject>& rejects) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << "line,event_id,reason\n";
    for (const auto& r : rejects) {
        out << r.line << ',' << csv::quote(r.id) << ',' << csv::quote(r.reason) << '\n';
    }
}

}  // namespace zinn
