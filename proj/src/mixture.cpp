#include "coc/mixture.hpp"

#include "coc/numerics.hpp"
#include "coc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace coc {

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;
constexpr double kTwoPi = 6.283185307179586476925286766559;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

// Random-access view of the stream's uniforms: u(i) is what RngStream would
// return on its (i+1)-th call.
inline double uniform_at(std::uint64_t key, long i) {
    return static_cast<double>(mix64(key + static_cast<std::uint64_t>(i + 1) * kGamma) >> 11) *
           0x1.0p-53;
}
inline double uniform_pos_at(std::uint64_t key, long i) {
    return static_cast<double>(
               (mix64(key + static_cast<std::uint64_t>(i + 1) * kGamma) >> 11) + 1) *
           0x1.0p-53;
}

// Normal i of the stream; Box-Muller pairs (2k, 2k+1) from uniforms (2k, 2k+1).
// Pure in (key, i): ranges can be filled in any order and always agree.
void fill_normals(std::uint64_t key, long start, long count, double* out) {
    long i = start;
    const long end = start + count;
    while (i < end && (i & 1L)) {  // leading odd index: recompute its pair
        const long k = i / 2;
        const double r = std::sqrt(-2.0 * std::log(uniform_pos_at(key, 2 * k)));
        out[i - start] = r * std::sin(kTwoPi * uniform_at(key, 2 * k + 1));
        ++i;
    }
    while (i + 1 < end) {
        const double r = std::sqrt(-2.0 * std::log(uniform_pos_at(key, i)));
        const double a = kTwoPi * uniform_at(key, i + 1);
        out[i - start] = r * std::cos(a);
        out[i - start + 1] = r * std::sin(a);
        i += 2;
    }
    if (i < end) {  // trailing even index: first half of a pair
        const double r = std::sqrt(-2.0 * std::log(uniform_pos_at(key, i)));
        out[i - start] = r * std::cos(kTwoPi * uniform_at(key, i + 1));
    }
}

// Per-thread cache of squared normals for one (key, draws) evaluation context.
// Columns are appended on demand; column j holds normals [j*m, (j+1)*m) of the
// flat stream, so slices for fewer weights are prefixes of bigger requests.
struct DrawCache {
    std::uint64_t key = 0;
    long m = 0;
    Matrix z2;
};
thread_local DrawCache g_cache;

const Matrix& squared_normals(std::uint64_t key, long m, Eigen::Index cols) {
    if (g_cache.key != key || g_cache.m != m) {
        g_cache.key = key;
        g_cache.m = m;
        g_cache.z2.resize(m, 0);
    }
    const Eigen::Index have = g_cache.z2.cols();
    if (have < cols) {
        g_cache.z2.conservativeResize(m, cols);
        std::vector<double> buf(static_cast<std::size_t>(m));
        for (Eigen::Index j = have; j < cols; ++j) {
            fill_normals(key, static_cast<long>(j) * m, m, buf.data());
            for (long i = 0; i < m; ++i) {
                const double z = buf[static_cast<std::size_t>(i)];
                g_cache.z2(i, j) = z * z;
            }
        }
    }
    return g_cache.z2;
}

void validate_mixture(const ChiSquareMixture& mix) {
    require(mix.weights.allFinite(), "mixture weights must be finite");
    require(mix.weights.size() == 0 || mix.weights.minCoeff() >= 0.0,
            "mixture weights must be nonnegative");
    require(std::isfinite(mix.offset) && mix.offset >= 0.0,
            "mixture offset must be finite and nonnegative");
    if (mix.noncentrality.size() > 0) {
        require(mix.noncentrality.size() == mix.weights.size(),
                "mixture noncentrality must align with weights");
        require(mix.noncentrality.allFinite() && mix.noncentrality.minCoeff() >= 0.0,
                "mixture noncentrality must be finite and nonnegative");
    }
}
}  // namespace

void validate_mc(const MonteCarloConfig& cfg) {
    require(cfg.draws >= 1000, "Monte Carlo draws must be at least 1000");
}

Vector mixture_weights(const Matrix& h, const Matrix& q_bar) {
    require(h.rows() == h.cols(), "H must be square");
    require(q_bar.rows() == h.rows() && q_bar.cols() == h.cols(),
            "Q must match H in shape");
    Matrix root = psd_sqrt(q_bar);
    Matrix m = root * h.transpose() * h * root;
    SymEigen eg = sym_eigen(0.5 * (m + m.transpose()));
    const double thr = kPsdClamp * std::max(m.norm(), 0.0);
    Vector w = eg.values;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) < -thr)
            throw NumericalError("mixture_weights: eigenvalue below the PSD clamp threshold");
        if (w(i) < thr) w(i) = 0.0;
    }
    return w;  // sym_eigen returns descending order
}

ChiSquareMixture central_mixture(Vector weights) {
    ChiSquareMixture mix;
    std::sort(weights.begin(), weights.end(), std::greater<double>());
    mix.weights = std::move(weights);
    validate_mixture(mix);
    return mix;
}

ChiSquareMixture noncentral_mixture(const Matrix& h, const Matrix& q_bar, const Vector& shift) {
    require(shift.size() == h.rows(), "shift length must match H");
    Matrix b = h * q_bar * h.transpose();
    b = 0.5 * (b + b.transpose());
    SymEigen eg = sym_eigen(b);
    Vector delta = eg.vectors.transpose() * shift;

    const double thr = kPsdClamp * std::max(b.norm(), 0.0);
    ChiSquareMixture mix;
    mix.weights = eg.values;  // descending; clamp below
    mix.noncentrality = Vector::Zero(eg.values.size());
    for (Eigen::Index j = 0; j < eg.values.size(); ++j) {
        double lam = eg.values(j);
        if (lam < -thr)
            throw NumericalError("noncentral_mixture: eigenvalue below the PSD clamp threshold");
        if (lam < thr) {
            mix.weights(j) = 0.0;
            mix.offset += delta(j) * delta(j);
        } else {
            mix.weights(j) = lam;
            mix.noncentrality(j) = delta(j) * delta(j) / lam;
        }
    }
    validate_mixture(mix);
    return mix;
}

Vector mixture_draws(const ChiSquareMixture& mix, const MonteCarloConfig& cfg) {
    validate_mixture(mix);
    validate_mc(cfg);
    const long m = cfg.draws;
    const Eigen::Index c = mix.weights.size();
    Vector acc = Vector::Constant(m, mix.offset);
    if (c == 0) return acc;

    const std::uint64_t key = derive_key(cfg.seed, stream::kMixture);
    const bool central = mix.noncentrality.size() == 0 || mix.noncentrality.maxCoeff() == 0.0;
    if (central) {
        const Matrix& z2 = squared_normals(key, m, c);
        acc.noalias() += z2.leftCols(c) * mix.weights;
    } else {
        // Same flat normal stream; shifted columns are materialized per call.
        std::vector<double> buf(static_cast<std::size_t>(m));
        for (Eigen::Index j = 0; j < c; ++j) {
            fill_normals(key, static_cast<long>(j) * m, m, buf.data());
            const double w = mix.weights(j);
            const double s = std::sqrt(mix.noncentrality(j));
            if (w == 0.0) continue;
            for (long i = 0; i < m; ++i) {
                const double t = buf[static_cast<std::size_t>(i)] + s;
                acc(i) += w * t * t;
            }
        }
    }
    return acc;
}

double survival(const ChiSquareMixture& mix, double x, const MonteCarloConfig& cfg) {
    validate_mixture(mix);
    validate_mc(cfg);
    require(std::isfinite(x), "survival: x must be finite");
    if (mix.is_degenerate()) return x <= mix.offset ? 1.0 : 0.0;
    Vector draws = mixture_draws(mix, cfg);
    const long hits = (draws.array() >= x).count();
    return static_cast<double>(hits) / static_cast<double>(cfg.draws);
}

double quantile(const ChiSquareMixture& mix, double level, const MonteCarloConfig& cfg) {
    validate_mixture(mix);
    validate_mc(cfg);
    require(level > 0.0 && level < 1.0, "quantile level must be in (0, 1)");
    if (mix.is_degenerate()) return mix.offset;
    Vector draws = mixture_draws(mix, cfg);
    long k = static_cast<long>(std::ceil(level * static_cast<double>(cfg.draws)));
    k = std::min(std::max(k, 1L), cfg.draws);
    std::nth_element(draws.begin(), draws.begin() + (k - 1), draws.end());
    return draws(k - 1);
}

}  // namespace coc
