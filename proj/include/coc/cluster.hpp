#pragma once

#include "coc/hypotests.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace coc {

// Bank of re-estimated thetas over a fixed set of centres. V, Q, and n stay
// frozen at their original values; rounds only replace theta.
struct RoundSet {
    std::vector<CentreSummary> base;          // original per-centre summaries
    std::vector<std::vector<Vector>> rounds;  // rounds[r][k]: theta of base[k] in round r+1
};

void validate_roundset(const RoundSet& rs);

struct CocTrace {
    Partition partition;
    std::vector<int> sizes;             // block count after each round
    std::vector<int> replicate_index;   // bank replicate consumed by each round
    std::vector<int> runlen;            // consecutive rounds with unchanged size
    int rounds_used = 0;
    std::string stop_reason;            // "plateau" or "rounds_exhausted"
};

// Single-pass partitioner: global homogeneity test, then sequential insertion
// of centres 2..K in input order (merge into the highest-p compatible block,
// ties to the earliest block; otherwise open a singleton).
Partition one_shot_coc(const std::vector<CentreSummary>& summaries, double alpha,
                       const MonteCarloConfig& cfg);

// Fixed number of rounds: round 1 seeds with one_shot_coc on the round-1
// thetas, each later round re-merges the previous blocks (merge-only).
CocTrace multi_round_coc(const RoundSet& rs, double alpha, const MonteCarloConfig& cfg);

// Replays the bank cyclically until the block count has been stable for
// `window` consecutive rounds.
CocTrace cyclic_coc(const RoundSet& rs, double alpha, long window, const MonteCarloConfig& cfg);

// Worst-case count of distinct merge decisions: K(K-1)/2 * 3^(K-2).
// Errors beyond the uint64 range rather than overflowing.
std::uint64_t n_max(int k);

// Heuristic plateau window: ceil(ln K * ln n_max(K)), computed in log space.
int stop_window(int k);

// How the cyclic plateau window is chosen: the log-scale heuristic (default),
// the exact n_max(K)+1 rule, or a user-fixed length.
struct WindowRule {
    enum class Mode { kHeuristic, kExact, kFixed } mode = Mode::kHeuristic;
    long value = 0;  // only for kFixed
};

WindowRule parse_window_rule(const std::string& text);  // "heuristic" | "exact" | integer
std::string window_rule_name(const WindowRule& rule);
long resolve_window(const WindowRule& rule, int k);

}  // namespace coc
