#pragma once

#include "coc/mixture.hpp"
#include "coc/summaries.hpp"

namespace coc {

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool reject = false;
    Vector weights;  // mixture weights of the reference law, descending
};

// Kp x Kp block operator: off-diagonal blocks I_p, diagonal block k equal to
// I_p - (sum_i V_i) V_k^{-1}. A singular V_k is reported with its index.
Matrix build_h(const std::vector<Matrix>& v_list);

// Cochran-type homogeneity test across all K >= 2 centres.
// Statistic: n * || blockdiag(sum V) * stack(theta_agg - theta_k) ||^2,
// compared against the weighted chi-square mixture law.
TestResult global_homogeneity_test(const std::vector<CentreSummary>& summaries, double alpha,
                                   const MonteCarloConfig& cfg);

// Two-block merge test: does the pooled estimate explain both block aggregates?
TestResult integration_test(const Block& a, const Block& b,
                            const std::vector<CentreSummary>& summaries, double alpha,
                            const MonteCarloConfig& cfg);

// Asymptotic power of the global test under the local drift theta_k + delta_k/sqrt(n).
// deltas align with `summaries`.
double local_power(const std::vector<CentreSummary>& summaries,
                   const std::vector<Vector>& deltas, double alpha,
                   const MonteCarloConfig& cfg);

}  // namespace coc
