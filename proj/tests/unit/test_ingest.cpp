#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "coc/ingest.hpp"
#include "doctest.h"
#include "support/helpers.hpp"

using coc::FlightRow;
using coc::IngestReport;
namespace fs = std::filesystem;

namespace {
fs::path fixture_path() { return testsupport::test_data_dir() / "flights_fixture.csv"; }

struct Loaded {
    std::vector<FlightRow> rows;
    std::vector<FlightRow> usable;
    IngestReport report;
};

const Loaded& load_fixture() {
    static const Loaded loaded = [] {
        Loaded l;
        l.rows = coc::read_flights_csv(fixture_path().string(), l.report);
        l.usable = coc::filter_usable(l.rows, l.report);
        return l;
    }();
    return loaded;
}

long count_dest(const std::vector<FlightRow>& rows, const std::string& dest) {
    long n = 0;
    for (const auto& r : rows)
        if (r.dest == dest) ++n;
    return n;
}
}  // namespace

TEST_CASE("fixture scan reproduces the frozen drop counts") {
    const auto& l = load_fixture();
    CHECK(l.report.total_rows == 2000);
    CHECK(l.report.malformed == 5);
    CHECK(l.report.cancelled == 30);
    CHECK(l.report.missing_delay == 20);
    CHECK(l.report.usable == 1945);
    CHECK(static_cast<long>(l.usable.size()) == 1945);
}

TEST_CASE("fixture per-destination usable counts are frozen") {
    const auto& l = load_fixture();
    CHECK(count_dest(l.usable, "AAA") == 520);
    CHECK(count_dest(l.usable, "BBB") == 510);
    CHECK(count_dest(l.usable, "CCC") == 450);
    CHECK(count_dest(l.usable, "DDD") == 300);
    CHECK(count_dest(l.usable, "EEE") == 165);
}

TEST_CASE("scheduled-hour classes split at the documented boundaries") {
    CHECK(coc::arr_hour_class(0) == 0);
    CHECK(coc::arr_hour_class(559) == 0);
    CHECK(coc::arr_hour_class(600) == 1);
    CHECK(coc::arr_hour_class(859) == 1);
    CHECK(coc::arr_hour_class(900) == 2);
    CHECK(coc::arr_hour_class(1459) == 2);
    CHECK(coc::arr_hour_class(1500) == 3);
    CHECK(coc::arr_hour_class(2159) == 3);
    CHECK(coc::arr_hour_class(2200) == 4);
    CHECK(coc::arr_hour_class(2400) == 4);
    CHECK_THROWS_AS(coc::arr_hour_class(2460), coc::ValidationError);
    CHECK_THROWS_AS(coc::arr_hour_class(-1), coc::ValidationError);
    CHECK_THROWS_AS(coc::arr_hour_class(2401), coc::ValidationError);
}

TEST_CASE("design matrix has the documented 22 columns") {
    const auto names = coc::design_column_names();
    REQUIRE(static_cast<int>(names.size()) == coc::kDesignColumns);
    CHECK(names[0] == "distance");
    // 6 day-of-week indicators, 11 month indicators, 4 arrival classes.
    int dow = 0, month = 0, arr = 0;
    for (const auto& n : names) {
        if (n.rfind("dow_", 0) == 0) ++dow;
        if (n.rfind("month_", 0) == 0) ++month;
        if (n.rfind("arr_", 0) == 0) ++arr;
    }
    CHECK(dow == 6);
    CHECK(month == 11);
    CHECK(arr == 4);
}

TEST_CASE("design rows encode the pinned fixture flights") {
    const auto& l = load_fixture();
    std::vector<FlightRow> aaa;
    for (const auto& r : l.usable)
        if (r.dest == "AAA") aaa.push_back(r);
    const auto d = coc::build_design(aaa);
    REQUIRE(d.X.cols() == coc::kDesignColumns);
    REQUIRE(d.X.rows() == 520);

    const auto names = coc::design_column_names();
    auto col = [&](const std::string& n) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == n) return static_cast<int>(i);
        FAIL(("column not found: " + n));
        return -1;
    };

    // Pinned rows (in file order): scheduled arrivals and delays for the
    // first AAA flights. Delay 15 is late (threshold is >= 15), 14 is not.
    CHECK(d.y(0) == 1.0);   // delay 15
    CHECK(d.y(1) == 0.0);   // delay 14
    CHECK(d.y(2) == 1.0);   // delay 20 at 2400
    CHECK(d.y(3) == 0.0);   // delay -5
    CHECK(d.y(6) == 1.0);   // delay 40

    // Row 0: month 1, weekday 1 -> every indicator zero; 0730 arrival -> class 1.
    CHECK(d.X(0, col("arr_6_8")) == 1.0);
    CHECK(d.X(0, col("arr_9_14")) == 0.0);
    CHECK(d.X(0, col("dow_2")) == 0.0);
    CHECK(d.X(0, col("month_2")) == 0.0);

    // Row 2: scheduled 2400 falls in the 22-24h class.
    CHECK(d.X(2, col("arr_22_24")) == 1.0);
    // Row 3: scheduled 0000 is the reference class -> all arr_* zero.
    CHECK(d.X(3, col("arr_6_8")) == 0.0);
    CHECK(d.X(3, col("arr_9_14")) == 0.0);
    CHECK(d.X(3, col("arr_15_21")) == 0.0);
    CHECK(d.X(3, col("arr_22_24")) == 0.0);
    // Rows 8 and 9 straddle the 1459/1500 boundary.
    CHECK(d.X(8, col("arr_9_14")) == 1.0);
    CHECK(d.X(9, col("arr_15_21")) == 1.0);
}

TEST_CASE("destination selection keeps only deep destinations") {
    const auto& l = load_fixture();
    const auto designs = coc::select_and_sample(l.usable, 500, 500, 7);
    REQUIRE(designs.size() == 2);
    REQUIRE(designs.count("AAA") == 1);
    REQUIRE(designs.count("BBB") == 1);
    for (const auto& [dest, d] : designs) {
        CHECK(d.X.rows() == 500);
        CHECK(d.X.cols() == coc::kDesignColumns);
        CHECK(d.y.size() == 500);
    }
}

TEST_CASE("destination sampling is seed deterministic") {
    const auto& l = load_fixture();
    const auto a = coc::select_and_sample(l.usable, 500, 500, 7);
    const auto b = coc::select_and_sample(l.usable, 500, 500, 7);
    REQUIRE((a.at("AAA").X.array() == b.at("AAA").X.array()).all());
    REQUIRE((a.at("AAA").y.array() == b.at("AAA").y.array()).all());
    const auto c = coc::select_and_sample(l.usable, 500, 500, 8);
    CHECK((a.at("AAA").X - c.at("AAA").X).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("sampling more than the floor is rejected") {
    const auto& l = load_fixture();
    CHECK_THROWS_AS(coc::select_and_sample(l.usable, 500, 501, 7), coc::ValidationError);
}

TEST_CASE("a floor higher than every destination yields an empty map") {
    const auto& l = load_fixture();
    const auto designs = coc::select_and_sample(l.usable, 100000, 100000, 7);
    CHECK(designs.empty());
}

TEST_CASE("a sampled destination supports the downstream logistic fit") {
    const auto& l = load_fixture();
    const auto designs = coc::select_and_sample(l.usable, 500, 500, 11);
    const auto& d = designs.at("AAA");
    coc::Dataset with_intercept;
    with_intercept.X = coc::Matrix::Ones(d.X.rows(), d.X.cols() + 1);
    with_intercept.X.rightCols(d.X.cols()) = d.X;
    with_intercept.y = d.y;
    const auto fit = coc::fit_glm(with_intercept, coc::Family::kLogistic, "AAA");
    CHECK(fit.diagnostics.converged);
    CHECK(fit.summary.theta.size() == coc::kDesignColumns + 1);
    CHECK_NOTHROW(coc::validate_summary(fit.summary));
}

TEST_CASE("missing flight files are reported cleanly") {
    IngestReport rep;
    CHECK_THROWS_AS(coc::read_flights_csv("/nonexistent/f.csv", rep),
                    coc::ValidationError);
}
