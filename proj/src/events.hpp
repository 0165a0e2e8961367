#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace zinn {

struct DateTime {
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;

    int day_of_year() const;
    double minutes_since_midnight() const { return hour * 60.0 + minute + second / 60.0; }
    bool operator<(const DateTime& o) const;
};

// "YYYY-MM-DD", "YYYY-MM-DDTHH:MM" or "YYYY-MM-DDTHH:MM:SS" (space also
// accepted as the separator). Throws InvalidArgument.
DateTime parse_datetime(const std::string& text);
bool is_leap_year(int year);

struct TornadoEvent {
    std::string id;
    double begin_lat = 0.0;
    double begin_lon = 0.0;
    DateTime begin;
    double duration_s = 0.0;
    double length = 0.0;  // source units, preserved as ingested
    double width = 0.0;
    double damage_usd = 0.0;  // as reported
    std::string narrative;

    int year() const { return begin.year; }
};

struct StudyWindow {
    DateTime first{1997, 1, 1, 0, 0, 0};
    DateTime last{2018, 12, 31, 23, 59, 59};
};

struct EventReject {
    std::size_t line;
    std::string id;
    std::string reason;
};

struct IngestResult {
    std::vector<TornadoEvent> events;
    std::vector<EventReject> rejects;
};

// Header: event_id,begin_lat,begin_lon,begin_datetime,duration_s,length,
// width,damage_usd,narrative (any order, extra columns ignored).
// Malformed rows go to `rejects`; throws SchemaMismatch / EmptyFile.
IngestResult ingest_events(const std::filesystem::path& path, const StudyWindow& window = {});
IngestResult parse_events(const std::string& text, const StudyWindow& window = {});

void write_events(const std::filesystem::path& path, const std::vector<TornadoEvent>& events);
void write_rejects(const std::filesystem::path& path, const std::vector<EventReject>& rejects);

}  // namespace zinn
