#include "coc/numerics.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace coc {

namespace {
constexpr double kJacobiTol = 1e-12;
constexpr int kJacobiMaxSweeps = 100;
constexpr double kJitterScale = 1e-10;

void check_finite(const Matrix& m, const std::string& what) {
    if (!m.allFinite()) throw ValidationError(what + " contains non-finite entries");
}

double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
}

// Returns the Cholesky factorization, retrying once with a diagonal jitter.
Eigen::LLT<Matrix> cholesky_with_jitter(const Matrix& m, const std::string& what) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() == Eigen::Success) return llt;
    const double jitter = kJitterScale * m.trace() / static_cast<double>(m.rows());
    Matrix bumped = m;
    bumped.diagonal().array() += jitter;
    llt.compute(bumped);
    if (llt.info() == Eigen::Success) return llt;
    throw SingularityError(what + " is not positive definite (Cholesky failed after jitter)");
}
}  // namespace

bool is_symmetric(const Matrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(m.norm(), 1e-300);
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Matrix symmetrize(const Matrix& m, const std::string& what) {
    require(m.rows() == m.cols(), what + " must be square");
    check_finite(m, what);
    if (!is_symmetric(m)) throw ValidationError(what + " is not symmetric");
    return 0.5 * (m + m.transpose());
}

SymEigen sym_eigen(const Matrix& m_in) {
    Matrix a = symmetrize(m_in, "sym_eigen input");
    const Eigen::Index d = a.rows();
    Matrix vecs = Matrix::Identity(d, d);
    const double scale = std::max(a.norm(), 1e-300);

    bool converged = off_diagonal_norm(a) <= kJacobiTol * scale;
    for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
        for (Eigen::Index p = 0; p < d - 1; ++p) {
            for (Eigen::Index q = p + 1; q < d; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // A <- J^T A J on rows/cols p,q
                for (Eigen::Index i = 0; i < d; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (Eigen::Index i = 0; i < d; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (Eigen::Index i = 0; i < d; ++i) {
                    const double vip = vecs(i, p), viq = vecs(i, q);
                    vecs(i, p) = c * vip - s * viq;
                    vecs(i, q) = s * vip + c * viq;
                }
            }
        }
        converged = off_diagonal_norm(a) <= kJacobiTol * scale;
    }
    if (!converged)
        throw NumericalError("sym_eigen: Jacobi sweeps did not converge within 100 sweeps");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

    SymEigen out;
    out.values.resize(d);
    out.vectors.resize(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = vecs.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

Matrix spd_inverse(const Matrix& m_in) {
    Matrix m = symmetrize(m_in, "spd_inverse input");
    auto llt = cholesky_with_jitter(m, "spd_inverse input");
    Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
    return 0.5 * (inv + inv.transpose());
}

Vector spd_solve(const Matrix& m_in, const Vector& rhs) {
    Matrix m = symmetrize(m_in, "spd_solve input");
    require(rhs.size() == m.rows(), "spd_solve: rhs size mismatch");
    return cholesky_with_jitter(m, "spd_solve input").solve(rhs);
}

Matrix psd_sqrt(const Matrix& m_in) {
    SymEigen eg = sym_eigen(m_in);
    const double scale = m_in.norm();
    Vector lam = eg.values;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < -kPsdClamp * scale)
            throw ValidationError("psd_sqrt: matrix has a genuinely negative eigenvalue");
        lam(i) = std::max(lam(i), 0.0);
    }
    Matrix root = eg.vectors * lam.cwiseSqrt().asDiagonal() * eg.vectors.transpose();
    return 0.5 * (root + root.transpose());
}

}  // namespace coc
