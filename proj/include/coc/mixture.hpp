#pragma once

#include "coc/common.hpp"

#include <cstdint>

namespace coc {

struct MonteCarloConfig {
    long draws = 100000;  // >= 1000
    std::uint64_t seed = 0;
};

void validate_mc(const MonteCarloConfig& cfg);

// Law of  sum_j w_j * chi2_1(nc_j) + offset.  Weights are kept in descending
// order by the constructors; `noncentrality` is either empty (central case)
// or aligned with `weights`. `offset` collects the deterministic mass sitting
// on zero-weight directions.
struct ChiSquareMixture {
    Vector weights;
    Vector noncentrality;
    double offset = 0.0;

    bool is_degenerate() const {
        return weights.size() == 0 || weights.maxCoeff() <= 0.0;
    }
};

// Eigenvalues of Q^{1/2} H^T H Q^{1/2}, descending, with numerically-zero
// values clamped to exactly 0 (threshold 1e-10 * Frobenius norm).
Vector mixture_weights(const Matrix& h, const Matrix& q_bar);

ChiSquareMixture central_mixture(Vector weights);

// Spectral form of the shifted law: H Q H^T = O diag(lambda) O^T, delta = O^T shift;
// positive-lambda directions carry noncentrality delta_j^2 / lambda_j, zero-lambda
// directions contribute delta_j^2 to the offset.
ChiSquareMixture noncentral_mixture(const Matrix& h, const Matrix& q_bar, const Vector& shift);

// P(mixture >= x), estimated from `cfg.draws` seeded Monte Carlo samples.
// Degenerate mixtures short-circuit exactly: 1 if x <= offset, else 0.
double survival(const ChiSquareMixture& mix, double x, const MonteCarloConfig& cfg);

// Order statistic ceil(level * draws) of the sorted sample; no interpolation.
double quantile(const ChiSquareMixture& mix, double level, const MonteCarloConfig& cfg);

// The full Monte Carlo sample (used by survival/quantile; exposed for tests).
// Normals are consumed column-major, one column per stored weight (zero
// weights included), from the stream derived from (cfg.seed, mixture label):
// identical inputs always reproduce identical draws.
Vector mixture_draws(const ChiSquareMixture& mix, const MonteCarloConfig& cfg);

}  // namespace coc
