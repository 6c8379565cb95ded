#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "coc/io.hpp"
#include "doctest.h"
#include "support/helpers.hpp"

using coc::CentreSummary;
using coc::Vector;
namespace fs = std::filesystem;

namespace {
std::vector<CentreSummary> sample_summaries() {
    coc::RngStream rng(coc::derive_key(6, coc::stream::kOracle, 80));
    std::vector<CentreSummary> out;
    out.push_back(testsupport::random_summary(rng, "alpha", 3, 250));
    out.push_back(testsupport::random_summary(rng, "beta", 3, 250));
    out.push_back(testsupport::random_summary(rng, "gamma", 3, 250));
    return out;
}

fs::path write_temp(const fs::path& dir, const std::string& name,
                    const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << text;
    return p;
}
}  // namespace

TEST_CASE("summary json round trip is bitwise exact") {
    const auto original = sample_summaries();
    const std::string doc = coc::summaries_to_json(original);
    std::istringstream in(doc);
    const auto parsed = coc::read_summaries(in);
    REQUIRE(parsed.size() == original.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
        CHECK(parsed[i].centre_id == original[i].centre_id);
        CHECK(parsed[i].n == original[i].n);
        REQUIRE((parsed[i].theta.array() == original[i].theta.array()).all());
        REQUIRE((parsed[i].V.array() == original[i].V.array()).all());
        REQUIRE((parsed[i].Q.array() == original[i].Q.array()).all());
    }
}

TEST_CASE("reader accepts a single object and a stream of objects") {
    const auto original = sample_summaries();
    // Single object (not wrapped in an array).
    const std::string single =
        coc::summaries_to_json({original[0]});
    // The writer emits an array; peel it by re-serializing one element through
    // a whitespace-separated stream instead.
    std::istringstream array_in(single);
    const auto from_array = coc::read_summaries(array_in);
    REQUIRE(from_array.size() == 1);

    // Stream of two bare objects separated by whitespace.
    std::string obj = single;
    // Strip the enclosing [ ... ] to get the bare object.
    const auto lb = obj.find('[');
    const auto rb = obj.rfind(']');
    REQUIRE(lb != std::string::npos);
    REQUIRE(rb != std::string::npos);
    obj = obj.substr(lb + 1, rb - lb - 1);
    std::istringstream stream_in(obj + "\n" + obj);
    auto two = coc::read_summaries(stream_in);
    REQUIRE(two.size() == 2);
    CHECK(two[0].centre_id == two[1].centre_id);
}

TEST_CASE("summary reader rejects malformed documents") {
    auto expect_throw = [](const std::string& text) {
        std::istringstream in(text);
        CHECK_THROWS_AS(coc::read_summaries(in), coc::ValidationError);
    };
    expect_throw("not json at all {{{");
    expect_throw("[]");  // no summaries
    expect_throw(R"({"centre_id": "a", "n": 10})");  // missing fields
    expect_throw(
        R"({"centre_id": "a", "n": 10, "p": 2, "theta": [0.0],
            "V": [1,0,0,1], "Q": [1,0,0,1]})");  // theta length mismatch
    expect_throw(
        R"({"centre_id": "a", "n": 10, "p": 1, "theta": [0.0],
            "V": [1,2], "Q": [1]})");  // V length mismatch
    expect_throw(
        R"({"centre_id": "a", "n": 10, "p": 1, "theta": [0.0],
            "V": [0.0], "Q": [1.0]})");  // V not positive definite
}

TEST_CASE("test result json carries the echoed configuration") {
    coc::TestResult r;
    r.statistic = 12.5;
    r.p_value = 0.003;
    r.alpha = 0.05;
    r.reject = true;
    r.weights = Vector::Zero(2);
    r.weights << 4.0, 0.0;
    const std::string doc =
        coc::test_result_to_json(r, {{"alpha", "0.05"}, {"draws", "100000"}});
    CHECK(doc.find("\"statistic\"") != std::string::npos);
    CHECK(doc.find("\"p_value\"") != std::string::npos);
    CHECK(doc.find("\"reject\": true") != std::string::npos);
    CHECK(doc.find("\"config\"") != std::string::npos);
    CHECK(doc.find("\"draws\"") != std::string::npos);
    CHECK(doc.back() == '\n');
}

TEST_CASE("roundset json round trip preserves every round") {
    coc::RoundSet rs;
    coc::RngStream rng(coc::derive_key(6, coc::stream::kOracle, 81));
    rs.base = {testsupport::random_summary(rng, "a", 2, 100),
               testsupport::random_summary(rng, "b", 2, 100)};
    for (int r = 0; r < 3; ++r) {
        std::vector<Vector> round;
        for (int k = 0; k < 2; ++k) {
            Vector t(2);
            t << rng.next_gaussian(), rng.next_gaussian();
            round.push_back(t);
        }
        rs.rounds.push_back(round);
    }
    const std::string doc = coc::roundset_to_json(rs);
    std::istringstream in(doc);
    const auto parsed = coc::read_roundset(in);
    REQUIRE(parsed.base.size() == 2);
    REQUIRE(parsed.rounds.size() == 3);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t k = 0; k < 2; ++k)
            REQUIRE((parsed.rounds[r][k].array() == rs.rounds[r][k].array()).all());
}

TEST_CASE("roundset reader rejects inconsistent documents") {
    coc::RoundSet rs;
    coc::RngStream rng(coc::derive_key(6, coc::stream::kOracle, 82));
    rs.base = {testsupport::random_summary(rng, "a", 1, 100),
               testsupport::random_summary(rng, "b", 1, 100)};
    rs.rounds = {{Vector::Zero(1), Vector::Zero(1)}};
    std::string doc = coc::roundset_to_json(rs);

    // Renumber the round: "r": 1 -> "r": 7 breaks the 1..R contract.
    auto broken = doc;
    const auto pos = broken.find("\"r\": 1");
    REQUIRE(pos != std::string::npos);
    broken.replace(pos, 6, "\"r\": 7");
    std::istringstream in1(broken);
    CHECK_THROWS_AS(coc::read_roundset(in1), coc::ValidationError);

    // Drop centre "b" from the round's theta map.
    auto missing = doc;
    const auto bpos = missing.find("\"b\": [");
    REQUIRE(bpos != std::string::npos);
    // Make it an unknown centre instead: rename the key.
    missing.replace(bpos, 3, "\"z\"");
    std::istringstream in2(missing);
    CHECK_THROWS_AS(coc::read_roundset(in2), coc::ValidationError);
}

TEST_CASE("delta files map centre ids to drift vectors") {
    const auto dir = testsupport::fresh_temp_dir("io_deltas");
    const auto path = write_temp(dir, "d.json",
                                 R"({"a": [0.0, 1.0], "b": [2.0, -1.0]})");
    const auto deltas = coc::read_deltas_file(path.string());
    REQUIRE(deltas.size() == 2);
    REQUIRE(deltas.at("a").size() == 2);
    CHECK(deltas.at("b")(0) == 2.0);
    const auto empty = write_temp(dir, "empty.json", "{}");
    CHECK_THROWS_AS(coc::read_deltas_file(empty.string()), coc::ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("dataset csv finds the response column by name") {
    const auto dir = testsupport::fresh_temp_dir("io_csv");
    const auto path = write_temp(dir, "d.csv",
                                 "x1,y,x2\n"
                                 "1.5,1,-2.0\n"
                                 "0.5,0,0.25\n");
    const auto with = coc::read_dataset_csv(path.string(), true);
    REQUIRE(with.X.rows() == 2);
    REQUIRE(with.X.cols() == 3);  // intercept + x1 + x2
    CHECK(with.X(0, 0) == 1.0);
    CHECK(with.X(0, 1) == 1.5);
    CHECK(with.X(0, 2) == -2.0);
    CHECK(with.y(0) == 1.0);
    CHECK(with.y(1) == 0.0);
    const auto without = coc::read_dataset_csv(path.string(), false);
    REQUIRE(without.X.cols() == 2);
    CHECK(without.X(1, 0) == 0.5);
    fs::remove_all(dir);
}

TEST_CASE("dataset csv rejects malformed content") {
    const auto dir = testsupport::fresh_temp_dir("io_csv_bad");
    const auto no_y = write_temp(dir, "a.csv", "x1,x2\n1,2\n");
    CHECK_THROWS_AS(coc::read_dataset_csv(no_y.string(), true), coc::ValidationError);
    const auto short_row = write_temp(dir, "b.csv", "x1,y\n1,0\n2\n");
    CHECK_THROWS_AS(coc::read_dataset_csv(short_row.string(), true), coc::ValidationError);
    const auto bad_num = write_temp(dir, "c.csv", "x1,y\nfoo,0\n");
    CHECK_THROWS_AS(coc::read_dataset_csv(bad_num.string(), true), coc::ValidationError);
    const auto missing = dir / "nope.csv";
    CHECK_THROWS_AS(coc::read_dataset_csv(missing.string(), true), coc::ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("trace csv has the documented shape") {
    coc::CocTrace trace;
    trace.sizes = {3, 2, 2};
    trace.replicate_index = {1, 2, 1};
    trace.runlen = {1, 1, 2};
    trace.rounds_used = 3;
    trace.stop_reason = "plateau";
    const std::string csv = coc::trace_to_csv(trace);
    CHECK(csv ==
          "round,replicate_index,n_blocks,runlen\n"
          "1,1,3,1\n"
          "2,2,2,1\n"
          "3,1,2,2\n");
}

TEST_CASE("text files write to disk and round trip") {
    const auto dir = testsupport::fresh_temp_dir("io_text");
    const auto path = (dir / "out.txt").string();
    coc::write_text_file(path, "hello\n");
    CHECK(testsupport::read_file(path) == "hello\n");
    fs::remove_all(dir);
}
