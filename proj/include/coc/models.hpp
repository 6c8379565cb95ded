#pragma once

#include "coc/summaries.hpp"

#include <functional>
#include <string>
#include <vector>

namespace coc {

struct Dataset {
    Matrix X;  // n x p design, intercept column included by the caller
    Vector y;
};

void validate_dataset(const Dataset& d);

enum class Family { kLogistic, kPoisson };
enum class RobustLoss { kHuber, kPseudoHuber, kLogCosh };

inline constexpr double kDefaultHuberDelta = 1.345;

struct FitDiagnostics {
    bool converged = false;
    int iterations = 0;
    double score_norm = 0.0;
    std::vector<std::string> warnings;
};

struct FitResult {
    CentreSummary summary;
    FitDiagnostics diagnostics;
};

// Canonical-link GLM by damped Newton from theta = 0 (score tol 1e-8, step tol
// 1e-10, 100 iterations). Optional per-row weights w >= 0 multiply the score.
// V = (1/n) sum w a''(x't) x x',  Q = (1/n) sum w^2 (y - a'(x't))^2 x x'.
FitResult fit_glm(const Dataset& d, Family family, const std::string& centre_id,
                  const Vector* weights = nullptr);

// psi = loss derivative, dpsi = its derivative. Huber's dpsi at the kinks
// |t| = delta is taken as 1.
double robust_psi(RobustLoss loss, double t, double delta);
double robust_dpsi(RobustLoss loss, double t, double delta);
double robust_rho(RobustLoss loss, double t, double delta);

// Robust linear regression solving (1/n) sum w psi(y - x't) x = 0 by IRLS.
// V = (1/n) sum w dpsi(r) x x',  Q = (1/n) sum w^2 psi(r)^2 x x'.
FitResult fit_robust(const Dataset& d, RobustLoss loss, double delta,
                     const std::string& centre_id, const Vector* weights = nullptr);

using UKernel = std::function<double(const Vector&, const Vector&)>;

// Degree-two U-statistic over the rows of `sample` with a symmetric kernel.
// theta = mean of the jackknife-style row means nu_i (equals the pairwise
// double sum), V = 1 / sqrt((4/n) sum (nu_i - theta)^2), Q = 1.
FitResult fit_ustat(const Matrix& sample, const UKernel& kernel, const std::string& centre_id);

}  // namespace coc
