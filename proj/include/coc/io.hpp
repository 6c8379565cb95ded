#pragma once

#include "coc/cluster.hpp"
#include "coc/hypotests.hpp"
#include "coc/models.hpp"
#include "coc/summaries.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace coc {

/// Summary exchange format. Each summary is the object
///   {"centre_id": "...", "n": int, "p": int,
///    "theta": [p floats], "V": [p*p floats row-major], "Q": [p*p floats row-major]}
/// and a document is either one object, a JSON array of them, or a
/// whitespace-separated stream of them.
std::vector<CentreSummary> read_summaries(std::istream& in);
std::vector<CentreSummary> read_summaries_file(const std::string& path);
std::string summaries_to_json(const std::vector<CentreSummary>& summaries);

/// TestResult <-> {"statistic": f, "p_value": f, "alpha": f, "reject": b, "weights": [f,...]}
/// `config` entries (flag name -> resolved value) are echoed under "config".
std::string test_result_to_json(const TestResult& result,
                                const std::map<std::string, std::string>& config);

/// Partition -> {"alpha": f, "blocks": [["id",...],...], "rounds_used": i, "seed": i}
/// plus the echoed "config" object.
std::string partition_to_json(const CocTrace& trace, double alpha, std::uint64_t seed,
                              const std::map<std::string, std::string>& config);

/// Trace CSV with header `round,replicate_index,n_blocks,runlen`.
std::string trace_to_csv(const CocTrace& trace);

/// RoundSet exchange: fixed summaries under "summaries" plus
///   {"rounds": [{"r": i, "theta": {"centre_id": [p floats]}}]}.
RoundSet read_roundset(std::istream& in);
RoundSet read_roundset_file(const std::string& path);
std::string roundset_to_json(const RoundSet& rs);

/// Local-alternative drift vectors: {"centre_id": [p floats], ...} keyed by centre.
std::map<std::string, Vector> read_deltas_file(const std::string& path);

/// Dataset CSV: header row, response column named `y`, all other columns are
/// features in file order. `add_intercept` prepends a column of ones.
Dataset read_dataset_csv(const std::string& path, bool add_intercept);

/// Writes `text` to `path`, or to stdout when path is "-".
void write_text_file(const std::string& path, const std::string& text);

}  // namespace coc
