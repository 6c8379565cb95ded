#include "coc/ingest.hpp"

#include "coc/rng.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace coc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool is_na(const std::string& s) { return s.empty() || s == "NA" || s == "na"; }

std::optional<long> parse_long(const std::string& raw) {
    const std::string s = trimmed(raw);
    if (s.empty()) return std::nullopt;
    long value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::optional<double> parse_double(const std::string& raw) {
    const std::string s = trimmed(raw);
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double value = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        return value;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace

std::vector<FlightRow> read_flights_csv(const std::string& path, IngestReport& report) {
    std::ifstream in(path);
    require(in.good(), "cannot open flights file '" + path + "'");

    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "flights file '" + path + "' is empty");
    const std::vector<std::string> header = split_csv_line(line);
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[trimmed(header[i])] = i;

    const auto need = [&](const char* name) {
        const auto it = col.find(name);
        require(it != col.end(),
                std::string("flights file is missing required column '") + name + "'");
        return it->second;
    };
    const std::size_t c_month = need("Month");
    const std::size_t c_dow = need("DayOfWeek");
    const std::size_t c_crs = need("CRSArrTime");
    const std::size_t c_delay = need("ArrDelay");
    const std::size_t c_cancelled = need("Cancelled");
    const std::size_t c_dest = need("Dest");
    const std::size_t c_dist = need("Distance");
    const std::size_t max_col =
        std::max({c_month, c_dow, c_crs, c_delay, c_cancelled, c_dest, c_dist});

    std::vector<FlightRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++report.total_rows;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() <= max_col) {
            ++report.malformed;
            continue;
        }
        FlightRow row;
        const auto month = parse_long(f[c_month]);
        const auto dow = parse_long(f[c_dow]);
        const auto crs = parse_long(f[c_crs]);
        const auto cancelled = parse_long(f[c_cancelled]);
        const auto dist = parse_double(f[c_dist]);
        row.dest = trimmed(f[c_dest]);
        if (!month || *month < 1 || *month > 12 || !dow || *dow < 1 || *dow > 7 || !crs ||
            *crs < 0 || *crs > 2400 || !cancelled || !dist || !(*dist >= 0) || row.dest.empty()) {
            ++report.malformed;
            continue;
        }
        row.month = static_cast<int>(*month);
        row.day_of_week = static_cast<int>(*dow);
        row.crs_arr_time = static_cast<int>(*crs);
        row.cancelled = *cancelled != 0;
        row.distance = *dist;
        const std::string delay_raw = trimmed(f[c_delay]);
        if (!is_na(delay_raw)) {
            const auto delay = parse_double(delay_raw);
            if (!delay) {
                ++report.malformed;
                continue;
            }
            row.arr_delay = *delay;
            row.has_delay = true;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<FlightRow> filter_usable(const std::vector<FlightRow>& rows, IngestReport& report) {
    std::vector<FlightRow> usable;
    usable.reserve(rows.size());
    for (const FlightRow& row : rows) {
        if (row.cancelled) {
            ++report.cancelled;
            continue;
        }
        if (!row.has_delay) {
            ++report.missing_delay;
            continue;
        }
        usable.push_back(row);
    }
    report.usable = static_cast<long>(usable.size());
    return usable;
}

int arr_hour_class(int crs_arr_time) {
    require(crs_arr_time >= 0 && crs_arr_time <= 2400,
            "scheduled arrival time must lie in 0000..2400");
    const int hour = crs_arr_time / 100;  // 2400 -> 24, grouped with the 22-24 class
    if (hour <= 5) return 0;
    if (hour <= 8) return 1;
    if (hour <= 14) return 2;
    if (hour <= 21) return 3;
    return 4;
}

std::vector<std::string> design_column_names() {
    std::vector<std::string> names{"distance"};
    for (int d = 2; d <= 7; ++d) names.push_back("dow_" + std::to_string(d));
    for (int m = 2; m <= 12; ++m) names.push_back("month_" + std::to_string(m));
    names.push_back("arr_6_8");
    names.push_back("arr_9_14");
    names.push_back("arr_15_21");
    names.push_back("arr_22_24");
    return names;
}

Dataset build_design(const std::vector<FlightRow>& rows) {
    require(!rows.empty(), "cannot build a design from zero rows");
    const long n = static_cast<long>(rows.size());
    Dataset d;
    d.X = Matrix::Zero(n, kDesignColumns);
    d.y.resize(n);
    for (long i = 0; i < n; ++i) {
        const FlightRow& row = rows[static_cast<std::size_t>(i)];
        require(row.has_delay && !row.cancelled, "design rows must be usable flights");
        Eigen::Index c = 0;
        d.X(i, c++) = row.distance;
        for (int dw = 2; dw <= 7; ++dw) d.X(i, c++) = row.day_of_week == dw ? 1.0 : 0.0;
        for (int m = 2; m <= 12; ++m) d.X(i, c++) = row.month == m ? 1.0 : 0.0;
        const int hc = arr_hour_class(row.crs_arr_time);
        for (int cls = 1; cls <= 4; ++cls) d.X(i, c++) = hc == cls ? 1.0 : 0.0;
        d.y(i) = row.arr_delay >= 15.0 ? 1.0 : 0.0;
    }
    return d;
}

std::map<std::string, Dataset> select_and_sample(const std::vector<FlightRow>& rows,
                                                 long min_flights, long sample_size,
                                                 std::uint64_t seed) {
    require(min_flights >= 1, "min_flights must be positive");
    require(sample_size >= 1, "sample_size must be positive");
    require(sample_size <= min_flights,
            "sample_size must not exceed the qualification threshold min_flights");

    std::map<std::string, std::vector<std::size_t>> by_dest;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].has_delay && !rows[i].cancelled,
                "select_and_sample expects usable (filtered) rows");
        by_dest[rows[i].dest].push_back(i);
    }

    std::map<std::string, Dataset> out;
    for (auto& [dest, idx] : by_dest) {
        if (static_cast<long>(idx.size()) < min_flights) continue;
        RngStream rng(derive_key(seed, stream::kIngestSample, hash_label(dest)));
        // Partial Fisher-Yates: after the loop the first sample_size slots hold
        // a uniform without-replacement sample in random order.
        for (long j = 0; j < sample_size; ++j) {
            const std::size_t pick =
                static_cast<std::size_t>(j) +
                static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(
                    static_cast<std::size_t>(idx.size()) - static_cast<std::size_t>(j))));
            std::swap(idx[static_cast<std::size_t>(j)], idx[pick]);
        }
        std::vector<FlightRow> chosen;
        chosen.reserve(static_cast<std::size_t>(sample_size));
        for (long j = 0; j < sample_size; ++j)
            chosen.push_back(rows[idx[static_cast<std::size_t>(j)]]);
        out.emplace(dest, build_design(chosen));
    }
    return out;
}

}  // namespace coc
