#pragma once

#include "coc/common.hpp"
#include "coc/models.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace coc {

/// One airline on-time record, reduced to the fields the delay model uses.
struct FlightRow {
    int month = 0;         // 1..12
    int day_of_week = 0;   // 1..7 (1 = Monday)
    int crs_arr_time = 0;  // scheduled arrival, HHMM on a 24h clock (2400 allowed)
    double arr_delay = 0;  // minutes; only meaningful when has_delay
    bool has_delay = false;
    bool cancelled = false;
    double distance = 0;  // miles
    std::string dest;     // destination airport code
};

/// Result of scanning a raw CSV: usable rows plus counts of what was dropped.
struct IngestReport {
    long total_rows = 0;
    long malformed = 0;
    long cancelled = 0;
    long missing_delay = 0;
    long usable = 0;
};

/// Reads an on-time performance CSV (2007 ASA schema: header row naming at least
/// Month, DayOfWeek, CRSArrTime, ArrDelay, Cancelled, Dest, Distance).
/// Malformed lines are counted in the report, not fatal.
std::vector<FlightRow> read_flights_csv(const std::string& path, IngestReport& report);

/// Keeps rows that are not cancelled and have an arrival delay recorded.
std::vector<FlightRow> filter_usable(const std::vector<FlightRow>& rows, IngestReport& report);

/// Scheduled-arrival-hour class: 0 for hours 0-5, 1 for 6-8, 2 for 9-14,
/// 3 for 15-21, 4 for 22-24 (2400 wraps into the late-night class).
/// Throws ValidationError when the HHMM value is outside 0000..2400.
int arr_hour_class(int crs_arr_time);

/// Dense design for the late-arrival model: 22 columns in order
///   Distance,
///   DayOfWeek indicators for 2..7 (Monday is the reference),
///   Month indicators for 2..12 (January is the reference),
///   arrival-hour-class indicators for classes 1..4 (0-5h is the reference).
/// The response is 1 when the flight arrived 15+ minutes late.
/// The intercept column is NOT included here; fitters prepend it.
Dataset build_design(const std::vector<FlightRow>& rows);

inline constexpr int kDesignColumns = 22;

/// Column names matching build_design's layout, for reports and CSV headers.
std::vector<std::string> design_column_names();

/// Groups usable rows by destination, keeps destinations with at least
/// `min_flights` usable rows, and draws a seeded subsample of exactly
/// `sample_size` rows from each (sample_size <= min_flights required).
/// Returns destination -> design, keyed so iteration is alphabetical.
std::map<std::string, Dataset> select_and_sample(const std::vector<FlightRow>& rows,
                                                 long min_flights, long sample_size,
                                                 std::uint64_t seed);

}  // namespace coc
