#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace coc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Input/contract violations (bad shapes, non-symmetric input, unknown ids, ...).
// The CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures (non-convergence, indefinite matrices, ...). Exit code 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularityError : NumericalError {
    explicit SingularityError(const std::string& msg) : NumericalError(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

}  // namespace coc
