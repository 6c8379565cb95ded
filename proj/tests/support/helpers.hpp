#pragma once

// Shared helpers for the test binaries: small constructors for synthetic
// centre summaries, random SPD matrices, logistic test data, and a couple of
// closed-form distribution functions used as independent oracles.

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coc/models.hpp"
#include "coc/rng.hpp"
#include "coc/summaries.hpp"

namespace testsupport {

using coc::Matrix;
using coc::Vector;

inline std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return (v != nullptr && *v != '\0') ? std::string(v) : fallback;
}

inline std::filesystem::path test_data_dir() {
    return std::filesystem::path(env_or("COC_TEST_DATA_DIR", "tests/data"));
}

inline std::filesystem::path fresh_temp_dir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path() /
                ("coc_tests_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(base);
    std::filesystem::create_directories(base);
    return base;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// A scalar (p = 1) summary with explicit V and Q entries.
inline coc::CentreSummary summary1(const std::string& id, std::int64_t n,
                                   double theta, double v = 1.0, double q = 1.0) {
    coc::CentreSummary s;
    s.centre_id = id;
    s.n = n;
    s.theta = Vector::Constant(1, theta);
    s.V = Matrix::Constant(1, 1, v);
    s.Q = Matrix::Constant(1, 1, q);
    return s;
}

// Random symmetric positive definite matrix: A*A' + dim-scaled ridge.
inline Matrix random_spd(coc::RngStream& rng, int dim, double ridge = 0.25) {
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = rng.next_gaussian();
    Matrix m = a * a.transpose() / static_cast<double>(dim);
    m += ridge * Matrix::Identity(dim, dim);
    return m;
}

inline Matrix random_symmetric(coc::RngStream& rng, int dim) {
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = rng.next_gaussian();
    return 0.5 * (a + a.transpose());
}

// A full random summary (valid by construction).
inline coc::CentreSummary random_summary(coc::RngStream& rng, const std::string& id,
                                         int p, std::int64_t n) {
    coc::CentreSummary s;
    s.centre_id = id;
    s.n = n;
    s.theta = Vector(p);
    for (int i = 0; i < p; ++i) s.theta(i) = rng.next_gaussian();
    s.V = random_spd(rng, p);
    s.Q = random_spd(rng, p);
    return s;
}

// Logistic regression data with a leading intercept column: X is n x p with
// X(:,0) = 1 and remaining columns standard normal; y ~ Bernoulli(sigmoid(X b)).
inline coc::Dataset logistic_data(const Vector& beta, std::int64_t n,
                                  std::uint64_t key) {
    coc::RngStream rng(key);
    const int p = static_cast<int>(beta.size());
    coc::Dataset d;
    d.X = Matrix::Ones(n, p);
    d.y = Vector(n);
    for (std::int64_t i = 0; i < n; ++i) {
        for (int j = 1; j < p; ++j) d.X(i, j) = rng.next_gaussian();
        const double eta = d.X.row(i).dot(beta);
        const double prob = 1.0 / (1.0 + std::exp(-eta));
        d.y(i) = (rng.next_double() < prob) ? 1.0 : 0.0;
    }
    return d;
}

// Standard normal CDF via erfc, used to freeze closed-form oracle values.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Survival function of a central chi-square with 1 degree of freedom.
inline double chi2_1_survival(double x) {
    return (x <= 0.0) ? 1.0 : std::erfc(std::sqrt(x / 2.0));
}

// Survival of a noncentral chi-square with 1 df and noncentrality nc,
// evaluated as P(|Z + sqrt(nc)| > sqrt(x)).
inline double chi2_1_noncentral_survival(double x, double nc) {
    if (x <= 0.0) return 1.0;
    const double r = std::sqrt(x);
    const double m = std::sqrt(nc);
    return (1.0 - norm_cdf(r - m)) + norm_cdf(-r - m);
}

}  // namespace testsupport
