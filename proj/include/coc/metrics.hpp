#pragma once

#include "coc/summaries.hpp"

#include <map>
#include <string>

namespace coc {

using LabelMap = std::map<std::string, int>;

// Adjusted Rand index between the reference labels and an estimated partition.
// The label map must cover exactly the ids appearing in the partition.
double ari(const LabelMap& truth, const Partition& estimate);

// Fraction of centres matched under the best one-to-one pairing between
// reference clusters and estimated blocks (Hungarian assignment on the padded
// square confusion matrix).
double best_match_accuracy(const LabelMap& truth, const Partition& estimate);

// Max-sum assignment on a square matrix; returns the assigned column per row.
// Exposed so tests can pit it against exhaustive search.
std::vector<int> hungarian_max(const Matrix& score);

}  // namespace coc
