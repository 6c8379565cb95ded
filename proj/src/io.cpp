#include "coc/io.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>

namespace coc {

namespace {

using ojson = nlohmann::ordered_json;
using njson = nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ValidationError(what); }

Vector to_vector(const njson& j, const std::string& what) {
    if (!j.is_array()) fail(what + " must be a JSON array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    Eigen::Index i = 0;
    for (const auto& x : j) {
        if (!x.is_number()) fail(what + " must contain only numbers");
        v(i++) = x.get<double>();
    }
    return v;
}

Matrix to_matrix(const njson& j, Eigen::Index p, const std::string& what) {
    const Vector flat = to_vector(j, what);
    if (flat.size() != p * p)
        fail(what + " must hold exactly " + std::to_string(p * p) + " row-major entries");
    Matrix m(p, p);
    for (Eigen::Index r = 0; r < p; ++r)
        for (Eigen::Index c = 0; c < p; ++c) m(r, c) = flat(r * p + c);
    return m;
}

njson vector_to_json(const Vector& v) {
    njson arr = njson::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

njson matrix_to_json(const Matrix& m) {
    njson arr = njson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
    return arr;
}

CentreSummary summary_from_json(const njson& j) {
    if (!j.is_object()) fail("each summary must be a JSON object");
    for (const char* key : {"centre_id", "n", "p", "theta", "V", "Q"})
        if (!j.contains(key)) fail(std::string("summary is missing field '") + key + "'");
    CentreSummary s;
    if (!j["centre_id"].is_string()) fail("'centre_id' must be a string");
    s.centre_id = j["centre_id"].get<std::string>();
    if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1)
        fail("'n' must be a positive integer");
    s.n = j["n"].get<long>();
    if (!j["p"].is_number_integer() || j["p"].get<long long>() < 1)
        fail("'p' must be a positive integer");
    const Eigen::Index p = j["p"].get<Eigen::Index>();
    s.theta = to_vector(j["theta"], "'theta'");
    if (s.theta.size() != p) fail("'theta' length must equal 'p'");
    s.V = to_matrix(j["V"], p, "'V'");
    s.Q = to_matrix(j["Q"], p, "'Q'");
    return validate_summary(s);
}

ojson summary_to_json(const CentreSummary& s) {
    ojson j;
    j["centre_id"] = s.centre_id;
    j["n"] = s.n;
    j["p"] = s.p();
    j["theta"] = vector_to_json(s.theta);
    j["V"] = matrix_to_json(s.V);
    j["Q"] = matrix_to_json(s.Q);
    return j;
}

// Parses a whole stream as one value, an array of values, or a sequence of
// whitespace-separated values ("JSON lines" style).
std::vector<njson> parse_documents(std::istream& in) {
    std::vector<njson> docs;
    while (true) {
        int c = in.peek();
        while (c != EOF && std::isspace(c)) {
            in.get();
            c = in.peek();
        }
        if (c == EOF) break;
        njson j;
        try {
            in >> j;
        } catch (const njson::parse_error& e) {
            fail(std::string("invalid JSON input: ") + e.what());
        }
        docs.push_back(std::move(j));
    }
    if (docs.size() == 1 && docs[0].is_array()) {
        std::vector<njson> items;
        for (auto& el : docs[0]) items.push_back(std::move(el));
        return items;
    }
    return docs;
}

ojson config_to_json(const std::map<std::string, std::string>& config) {
    ojson j = ojson::object();
    for (const auto& [key, value] : config) j[key] = value;
    return j;
}

}  // namespace

std::vector<CentreSummary> read_summaries(std::istream& in) {
    std::vector<CentreSummary> out;
    for (const njson& doc : parse_documents(in)) out.push_back(summary_from_json(doc));
    if (out.empty()) fail("no summaries found in input");
    return out;
}

std::vector<CentreSummary> read_summaries_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open summaries file '" + path + "'");
    return read_summaries(in);
}

std::string summaries_to_json(const std::vector<CentreSummary>& summaries) {
    ojson arr = ojson::array();
    for (const CentreSummary& s : summaries) arr.push_back(summary_to_json(s));
    return arr.dump(2) + "\n";
}

std::string test_result_to_json(const TestResult& result,
                                const std::map<std::string, std::string>& config) {
    ojson j;
    j["statistic"] = result.statistic;
    j["p_value"] = result.p_value;
    j["alpha"] = result.alpha;
    j["reject"] = result.reject;
    j["weights"] = vector_to_json(result.weights);
    if (!config.empty()) j["config"] = config_to_json(config);
    return j.dump(2) + "\n";
}

std::string partition_to_json(const CocTrace& trace, double alpha, std::uint64_t seed,
                              const std::map<std::string, std::string>& config) {
    ojson j;
    j["alpha"] = alpha;
    ojson blocks = ojson::array();
    for (const Block& b : trace.partition.blocks) {
        ojson members = ojson::array();
        for (const std::string& id : b.members) members.push_back(id);
        blocks.push_back(std::move(members));
    }
    j["blocks"] = std::move(blocks);
    j["rounds_used"] = trace.rounds_used;
    j["seed"] = seed;
    j["stop_reason"] = trace.stop_reason;
    if (!config.empty()) j["config"] = config_to_json(config);
    return j.dump(2) + "\n";
}

std::string trace_to_csv(const CocTrace& trace) {
    std::ostringstream out;
    out << "round,replicate_index,n_blocks,runlen\n";
    for (std::size_t i = 0; i < trace.sizes.size(); ++i)
        out << (i + 1) << ',' << trace.replicate_index[i] << ',' << trace.sizes[i] << ','
            << trace.runlen[i] << '\n';
    return out.str();
}

RoundSet read_roundset(std::istream& in) {
    njson j;
    try {
        in >> j;
    } catch (const njson::parse_error& e) {
        fail(std::string("invalid JSON input: ") + e.what());
    }
    if (!j.is_object() || !j.contains("summaries") || !j.contains("rounds"))
        fail("round-set input must be an object with 'summaries' and 'rounds'");
    RoundSet rs;
    if (!j["summaries"].is_array()) fail("'summaries' must be an array");
    for (const auto& el : j["summaries"]) rs.base.push_back(summary_from_json(el));
    require(!rs.base.empty(), "round-set needs at least one summary");

    if (!j["rounds"].is_array()) fail("'rounds' must be an array");
    int expected_r = 0;
    for (const auto& round : j["rounds"]) {
        ++expected_r;
        if (!round.is_object() || !round.contains("r") || !round.contains("theta"))
            fail("each round must be an object with 'r' and 'theta'");
        if (!round["r"].is_number_integer() || round["r"].get<int>() != expected_r)
            fail("round indices must be 1,2,... in order; got a mismatch at position " +
                 std::to_string(expected_r));
        const auto& theta = round["theta"];
        if (!theta.is_object()) fail("'theta' must map centre ids to vectors");
        std::vector<Vector> row;
        for (const CentreSummary& s : rs.base) {
            if (!theta.contains(s.centre_id))
                fail("round " + std::to_string(expected_r) + " is missing centre '" +
                     s.centre_id + "'");
            Vector t = to_vector(theta[s.centre_id], "round theta for '" + s.centre_id + "'");
            if (t.size() != s.theta.size())
                fail("round theta for '" + s.centre_id + "' has the wrong length");
            row.push_back(std::move(t));
        }
        if (theta.size() != rs.base.size())
            fail("round " + std::to_string(expected_r) + " names unknown centres");
        rs.rounds.push_back(std::move(row));
    }
    validate_roundset(rs);
    return rs;
}

RoundSet read_roundset_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open round-set file '" + path + "'");
    return read_roundset(in);
}

std::string roundset_to_json(const RoundSet& rs) {
    ojson j;
    ojson summaries = ojson::array();
    for (const CentreSummary& s : rs.base) summaries.push_back(summary_to_json(s));
    j["summaries"] = std::move(summaries);
    ojson rounds = ojson::array();
    for (std::size_t r = 0; r < rs.rounds.size(); ++r) {
        ojson round;
        round["r"] = static_cast<int>(r + 1);
        ojson theta = ojson::object();
        for (std::size_t k = 0; k < rs.base.size(); ++k)
            theta[rs.base[k].centre_id] = vector_to_json(rs.rounds[r][k]);
        round["theta"] = std::move(theta);
        rounds.push_back(std::move(round));
    }
    j["rounds"] = std::move(rounds);
    return j.dump(2) + "\n";
}

std::map<std::string, Vector> read_deltas_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open deltas file '" + path + "'");
    njson j;
    try {
        in >> j;
    } catch (const njson::parse_error& e) {
        fail(std::string("invalid JSON input: ") + e.what());
    }
    if (!j.is_object() || j.empty()) fail("deltas must be a nonempty object of centre -> vector");
    std::map<std::string, Vector> out;
    for (const auto& [key, value] : j.items()) out[key] = to_vector(value, "delta for '" + key + "'");
    return out;
}

Dataset read_dataset_csv(const std::string& path, bool add_intercept) {
    std::ifstream in(path);
    require(in.good(), "cannot open dataset file '" + path + "'");
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "dataset file '" + path + "' is empty");

    auto split = [](const std::string& s) {
        std::vector<std::string> fields;
        std::string cur;
        for (char ch : s) {
            if (ch == ',') {
                fields.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur += ch;
            }
        }
        fields.push_back(cur);
        return fields;
    };

    const std::vector<std::string> header = split(line);
    long y_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == "y") y_col = static_cast<long>(i);
    require(y_col >= 0, "dataset file needs a response column named 'y'");
    const long n_features = static_cast<long>(header.size()) - 1;
    require(n_features >= 1 || add_intercept, "dataset file has no feature columns");

    std::vector<std::vector<double>> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split(line);
        require(fields.size() == header.size(),
                "dataset line " + std::to_string(line_no) + " has the wrong number of fields");
        std::vector<double> row;
        for (const std::string& f : fields) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(f, &used));
                require(used == f.size(), "dataset line " + std::to_string(line_no) +
                                              " has a non-numeric field '" + f + "'");
            } catch (const ValidationError&) {
                throw;
            } catch (const std::exception&) {
                fail("dataset line " + std::to_string(line_no) + " has a non-numeric field '" +
                     f + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    require(!rows.empty(), "dataset file has no data rows");

    const long n = static_cast<long>(rows.size());
    const long p = n_features + (add_intercept ? 1 : 0);
    Dataset d;
    d.X.resize(n, p);
    d.y.resize(n);
    for (long i = 0; i < n; ++i) {
        long c = 0;
        if (add_intercept) d.X(i, c++) = 1.0;
        for (long j = 0; j < static_cast<long>(header.size()); ++j) {
            if (j == y_col) continue;
            d.X(i, c++) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        d.y(i) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(y_col)];
    }
    return d;
}

void write_text_file(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    require(out.good(), "cannot open '" + path + "' for writing");
    out << text;
    require(static_cast<bool>(out << std::flush), "failed writing '" + path + "'");
}

}  // namespace coc
