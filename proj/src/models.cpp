#include "coc/models.hpp"

#include "coc/numerics.hpp"

#include <cmath>

namespace coc {

namespace {
constexpr int kMaxIter = 100;
constexpr double kScoreTol = 1e-8;
constexpr double kStepTol = 1e-10;
constexpr double kSeparationCutoff = 30.0;

void check_weights(const Vector* w, Eigen::Index n) {
    if (!w) return;
    require(w->size() == n, "weight vector length must match the data");
    require(w->allFinite() && w->minCoeff() >= 0.0, "weights must be finite and nonnegative");
}

// log(1 + e^t) without overflow
inline double softplus(double t) {
    return (t > 0 ? t : 0.0) + std::log1p(std::exp(-std::abs(t)));
}

struct GlmFuncs {
    double (*mean)(double);      // a'
    double (*variance)(double);  // a''
    double (*cumulant)(double);  // a
};

const GlmFuncs& glm_funcs(Family family) {
    static const GlmFuncs logistic{
        [](double t) { return 1.0 / (1.0 + std::exp(-t)); },
        [](double t) {
            const double m = 1.0 / (1.0 + std::exp(-t));
            return m * (1.0 - m);
        },
        softplus};
    static const GlmFuncs poisson{[](double t) { return std::exp(t); },
                                  [](double t) { return std::exp(t); },
                                  [](double t) { return std::exp(t); }};
    return family == Family::kLogistic ? logistic : poisson;
}

// LLT can slide past an exactly singular matrix on rounding alone, so the
// first-iteration rank check is spectral: the design is treated as rank
// deficient when the smallest curvature eigenvalue is within rounding of
// zero relative to the largest.
void require_full_rank(const Matrix& h, const std::string& centre_id) {
    SymEigen eg = sym_eigen(h);
    const double top = eg.values(0);
    if (!(top > 0.0) || eg.values(eg.values.size() - 1) <= 1e-12 * top)
        throw SingularityError("fit '" + centre_id + "': design matrix is rank deficient");
}

// Shared damped-Newton driver. obj/score/hessian are functions of theta;
// the first Hessian check is strict so rank deficiency of the design
// surfaces as SingularityError instead of a junk fit.
struct NewtonProblem {
    std::function<double(const Vector&)> objective;
    std::function<Vector(const Vector&)> score;
    std::function<Matrix(const Vector&)> hessian;
};

Vector damped_newton(const NewtonProblem& prob, Eigen::Index p, FitDiagnostics& diag,
                     const std::string& centre_id) {
    Vector theta = Vector::Zero(p);
    // Rank is checked before the convergence test: a symmetric starting point
    // can zero the score of a rank-deficient design, which must still error.
    require_full_rank(prob.hessian(theta), centre_id);
    double obj = prob.objective(theta);
    for (int it = 0; it < kMaxIter; ++it) {
        Vector g = prob.score(theta);
        diag.iterations = it;
        diag.score_norm = g.norm();
        if (diag.score_norm < kScoreTol) {
            diag.converged = true;
            return theta;
        }
        Matrix h = prob.hessian(theta);
        Vector dir = spd_solve(h, g);
        double t = 1.0;
        Vector cand = theta + dir;
        double cand_obj = prob.objective(cand);
        int halvings = 0;
        while (!(cand_obj < obj + 1e-12 * std::abs(obj)) && halvings < 60) {
            t *= 0.5;
            cand = theta + t * dir;
            cand_obj = prob.objective(cand);
            ++halvings;
        }
        if ((t * dir).norm() < kStepTol) {
            diag.converged = true;
            diag.iterations = it + 1;
            return cand;
        }
        theta = cand;
        obj = cand_obj;
    }
    Vector g = prob.score(theta);
    diag.score_norm = g.norm();
    diag.iterations = kMaxIter;
    throw NumericalError("fit '" + centre_id + "' did not converge in 100 iterations (score norm " +
                         std::to_string(diag.score_norm) + ")");
}
}  // namespace

void validate_dataset(const Dataset& d) {
    require(d.X.rows() > 0 && d.X.cols() > 0, "empty design matrix");
    require(d.y.size() == d.X.rows(), "response length must match the design");
    require(d.X.allFinite(), "design matrix has non-finite entries");
    require(d.y.allFinite(), "response has non-finite entries");
    require(d.X.rows() > d.X.cols(), "need more observations than parameters");
}

FitResult fit_glm(const Dataset& d, Family family, const std::string& centre_id,
                  const Vector* weights) {
    validate_dataset(d);
    check_weights(weights, d.X.rows());
    if (family == Family::kLogistic)
        require(((d.y.array() == 0.0) || (d.y.array() == 1.0)).all(),
                "logistic response must be 0/1");
    else
        require((d.y.array() >= 0.0).all(), "poisson response must be nonnegative");

    const Eigen::Index n = d.X.rows();
    const Eigen::Index p = d.X.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    Vector w = weights ? *weights : Vector::Ones(n);
    const GlmFuncs& fns = glm_funcs(family);

    auto eta_of = [&](const Vector& th) { return Vector(d.X * th); };
    NewtonProblem prob;
    prob.objective = [&](const Vector& th) {
        Vector eta = eta_of(th);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            acc += w(i) * (fns.cumulant(eta(i)) - d.y(i) * eta(i));
        return acc * inv_n;
    };
    prob.score = [&](const Vector& th) {
        Vector eta = eta_of(th);
        Vector resid(n);
        for (Eigen::Index i = 0; i < n; ++i) resid(i) = w(i) * (d.y(i) - fns.mean(eta(i)));
        return Vector(d.X.transpose() * resid * inv_n);
    };
    prob.hessian = [&](const Vector& th) {
        Vector eta = eta_of(th);
        Vector wv(n);
        for (Eigen::Index i = 0; i < n; ++i) wv(i) = w(i) * fns.variance(eta(i));
        Matrix h = d.X.transpose() * wv.asDiagonal() * d.X * inv_n;
        return Matrix(0.5 * (h + h.transpose()));
    };

    FitResult out;
    out.summary.centre_id = centre_id;
    out.summary.n = static_cast<long>(n);
    out.summary.theta = damped_newton(prob, p, out.diagnostics, centre_id);

    Vector eta = eta_of(out.summary.theta);
    if (family == Family::kLogistic && eta.cwiseAbs().maxCoeff() > kSeparationCutoff)
        out.diagnostics.warnings.push_back(
            "quasi-separation suspected: |x'theta| exceeds 30 for some rows");

    Vector wv(n), wq(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double resid = d.y(i) - fns.mean(eta(i));
        wv(i) = w(i) * fns.variance(eta(i));
        wq(i) = w(i) * w(i) * resid * resid;
    }
    Matrix v = d.X.transpose() * wv.asDiagonal() * d.X * inv_n;
    Matrix q = d.X.transpose() * wq.asDiagonal() * d.X * inv_n;
    out.summary.V = 0.5 * (v + v.transpose());
    out.summary.Q = 0.5 * (q + q.transpose());
    return out;
}

double robust_rho(RobustLoss loss, double t, double delta) {
    require(delta > 0.0, "delta must be positive");
    const double u = t / delta;
    switch (loss) {
        case RobustLoss::kHuber:
            return std::abs(t) <= delta ? 0.5 * t * t : delta * std::abs(t) - 0.5 * delta * delta;
        case RobustLoss::kPseudoHuber:
            return delta * delta * (std::sqrt(1.0 + u * u) - 1.0);
        case RobustLoss::kLogCosh:
            // log cosh(u) computed stably as |u| + log1p(e^{-2|u|}) - log 2
            return delta * delta *
                   (std::abs(u) + std::log1p(std::exp(-2.0 * std::abs(u))) - std::log(2.0));
    }
    throw ValidationError("unknown robust loss");
}

double robust_psi(RobustLoss loss, double t, double delta) {
    require(delta > 0.0, "delta must be positive");
    const double u = t / delta;
    switch (loss) {
        case RobustLoss::kHuber:
            return std::clamp(t, -delta, delta);
        case RobustLoss::kPseudoHuber:
            return t / std::sqrt(1.0 + u * u);
        case RobustLoss::kLogCosh:
            return delta * std::tanh(u);
    }
    throw ValidationError("unknown robust loss");
}

double robust_dpsi(RobustLoss loss, double t, double delta) {
    require(delta > 0.0, "delta must be positive");
    const double u = t / delta;
    switch (loss) {
        case RobustLoss::kHuber:
            return std::abs(t) <= delta ? 1.0 : 0.0;  // kinks |t| = delta count as 1
        case RobustLoss::kPseudoHuber: {
            const double s = 1.0 + u * u;
            return 1.0 / (s * std::sqrt(s));
        }
        case RobustLoss::kLogCosh: {
            const double th = std::tanh(u);
            return 1.0 - th * th;
        }
    }
    throw ValidationError("unknown robust loss");
}

FitResult fit_robust(const Dataset& d, RobustLoss loss, double delta,
                     const std::string& centre_id, const Vector* weights) {
    validate_dataset(d);
    check_weights(weights, d.X.rows());
    require(delta > 0.0, "delta must be positive");

    const Eigen::Index n = d.X.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    Vector w = weights ? *weights : Vector::Ones(n);

    FitResult out;
    out.summary.centre_id = centre_id;
    out.summary.n = static_cast<long>(n);
    Vector theta = Vector::Zero(d.X.cols());
    auto score_norm = [&](const Vector& th) {
        Vector r = d.y - d.X * th;
        Vector s(n);
        for (Eigen::Index i = 0; i < n; ++i) s(i) = w(i) * robust_psi(loss, r(i), delta);
        return (d.X.transpose() * s * inv_n).norm();
    };

    // IRLS weights psi(r)/r are strictly positive for these losses.
    auto irls_w = [&](const Vector& r) {
        Vector wi(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ri = r(i);
            wi(i) = w(i) * (std::abs(ri) < 1e-12 ? robust_dpsi(loss, ri, delta)
                                                 : robust_psi(loss, ri, delta) / ri);
        }
        return wi;
    };

    // Rank is checked before the loop: a response that already zeroes the
    // score at theta = 0 must not slip a rank-deficient design through.
    {
        Matrix a0 = d.X.transpose() * irls_w(d.y).asDiagonal() * d.X;
        require_full_rank(0.5 * (a0 + a0.transpose()), centre_id);
    }

    FitDiagnostics& diag = out.diagnostics;
    for (int it = 0; it < kMaxIter; ++it) {
        Vector r = d.y - d.X * theta;
        diag.iterations = it;
        diag.score_norm = score_norm(theta);
        if (diag.score_norm < kScoreTol) {
            diag.converged = true;
            break;
        }
        Vector wi = irls_w(r);
        Matrix a = d.X.transpose() * wi.asDiagonal() * d.X;
        Vector b = d.X.transpose() * wi.asDiagonal() * d.y;
        Vector next = spd_solve(a, b);
        if ((next - theta).norm() < kStepTol) {
            theta = next;
            diag.converged = true;
            diag.iterations = it + 1;
            diag.score_norm = score_norm(theta);
            break;
        }
        theta = next;
    }
    if (!diag.converged)
        throw NumericalError("fit '" + centre_id + "' did not converge in 100 iterations (score norm " +
                             std::to_string(diag.score_norm) + ")");

    Vector r = d.y - d.X * theta;
    Vector wv(n), wq(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double psi = robust_psi(loss, r(i), delta);
        wv(i) = w(i) * robust_dpsi(loss, r(i), delta);
        wq(i) = w(i) * w(i) * psi * psi;
    }
    Matrix v = d.X.transpose() * wv.asDiagonal() * d.X * inv_n;
    Matrix q = d.X.transpose() * wq.asDiagonal() * d.X * inv_n;
    out.summary.theta = theta;
    out.summary.V = 0.5 * (v + v.transpose());
    out.summary.Q = 0.5 * (q + q.transpose());
    return out;
}

FitResult fit_ustat(const Matrix& sample, const UKernel& kernel, const std::string& centre_id) {
    const Eigen::Index n = sample.rows();
    require(n >= 2, "U-statistic needs at least two observations");
    require(sample.allFinite(), "sample has non-finite entries");
    require(static_cast<bool>(kernel), "kernel must be callable");

    Vector row_sum = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector xi = sample.row(i);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double h = kernel(xi, Vector(sample.row(j)));
            require(std::isfinite(h), "kernel returned a non-finite value");
            row_sum(i) += h;
            row_sum(j) += h;
        }
    }
    Vector nu = row_sum / static_cast<double>(n - 1);
    const double theta = nu.mean();
    const double var = 4.0 / static_cast<double>(n) * (nu.array() - theta).square().sum();
    if (var <= 0.0)
        throw NumericalError("fit '" + centre_id + "': degenerate U-statistic (zero variance)");

    FitResult out;
    out.summary.centre_id = centre_id;
    out.summary.n = static_cast<long>(n);
    out.summary.theta = Vector::Constant(1, theta);
    out.summary.V = Matrix::Constant(1, 1, 1.0 / std::sqrt(var));
    out.summary.Q = Matrix::Identity(1, 1);
    out.diagnostics.converged = true;
    return out;
}

}  // namespace coc
