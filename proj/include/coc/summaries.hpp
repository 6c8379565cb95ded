#pragma once

#include "coc/common.hpp"

#include <string>
#include <vector>

namespace coc {

// What one centre ships to the aggregator: its estimate plus the two
// per-observation curvature/variability matrices. Never the raw rows.
struct CentreSummary {
    std::string centre_id;
    long n = 0;
    Vector theta;
    Matrix V;  // p x p, symmetric positive definite
    Matrix Q;  // p x p, symmetric positive semidefinite, nonzero

    int p() const { return static_cast<int>(theta.size()); }
};

// All violations found, empty if the summary is well formed.
std::vector<std::string> summary_violations(const CentreSummary& s);

// Returns the summary with V and Q in exactly symmetric storage;
// throws ValidationError listing every violation (prefixed by centre id).
CentreSummary validate_summary(const CentreSummary& s);

// A block is a set of centre ids; kept sorted for determinism.
struct Block {
    std::vector<std::string> members;
};

struct Partition {
    std::vector<Block> blocks;
};

Block make_block(std::vector<std::string> members);
Block merge_blocks(const Block& a, const Block& b);

// Checks the blocks are nonempty, disjoint, and exactly cover `universe`.
void validate_partition(const Partition& part, const std::vector<std::string>& universe);

struct AggregatedEstimate {
    Vector theta;
    Matrix V_sum;  // sum of the members' V
    Matrix Q_sum;  // sum of the members' Q
    Matrix W;      // sandwich V_sum^{-1} Q_sum V_sum^{-1}
};

// theta = (sum V_k)^{-1} sum V_k theta_k over the given centres.
// Requires a nonempty list with equal p; summaries are validated first.
AggregatedEstimate aee_aggregate(const std::vector<CentreSummary>& members);

// Merging two aggregates gives exactly the aggregate of the union
// (associativity of the V-weighted combination).
AggregatedEstimate combine_aggregates(const AggregatedEstimate& a, const AggregatedEstimate& b);

// Common guards used at analysis entry.
void require_equal_p(const std::vector<CentreSummary>& all);
void require_equal_n(const std::vector<CentreSummary>& all);
void require_distinct_ids(const std::vector<CentreSummary>& all);

}  // namespace coc
