#include "coc/hypotests.hpp"

#include "coc/numerics.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace coc {

namespace {
void require_alpha(double alpha) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
}

// Sorting by centre id before any arithmetic makes results exactly invariant
// under permutations of the input list (identical floating-point operation order).
std::vector<CentreSummary> canonical(const std::vector<CentreSummary>& summaries) {
    std::vector<CentreSummary> out;
    out.reserve(summaries.size());
    for (const auto& s : summaries) out.push_back(validate_summary(s));
    std::sort(out.begin(), out.end(),
              [](const CentreSummary& a, const CentreSummary& b) {
                  return a.centre_id < b.centre_id;
              });
    return out;
}

double pvalue_of(const ChiSquareMixture& mix, double statistic, const MonteCarloConfig& cfg) {
    // All-zero weight vectors (identical summaries & co.) never reject.
    if (mix.is_degenerate()) return 1.0;
    return survival(mix, statistic, cfg);
}

Matrix block_diag(const std::vector<Matrix>& blocks) {
    Eigen::Index total = 0;
    for (const auto& b : blocks) total += b.rows();
    Matrix out = Matrix::Zero(total, total);
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
        out.block(at, at, b.rows(), b.cols()) = b;
        at += b.rows();
    }
    return out;
}
}  // namespace

Matrix build_h(const std::vector<Matrix>& v_list) {
    require(!v_list.empty(), "build_h: empty V list");
    const Eigen::Index p = v_list.front().rows();
    Matrix v_sum = Matrix::Zero(p, p);
    for (const auto& v : v_list) {
        require(v.rows() == p && v.cols() == p, "build_h: inconsistent block shapes");
        v_sum += v;
    }
    const Eigen::Index k = static_cast<Eigen::Index>(v_list.size());
    const Matrix eye = Matrix::Identity(p, p);
    Matrix h(k * p, k * p);
    for (Eigen::Index i = 0; i < k; ++i) {
        Matrix inv;
        try {
            inv = spd_inverse(v_list[static_cast<std::size_t>(i)]);
        } catch (const SingularityError&) {
            throw SingularityError("build_h: V block " + std::to_string(i + 1) + " is singular");
        }
        for (Eigen::Index j = 0; j < k; ++j)
            h.block(i * p, j * p, p, p) = (i == j) ? Matrix(eye - v_sum * inv) : eye;
    }
    return h;
}

TestResult global_homogeneity_test(const std::vector<CentreSummary>& summaries, double alpha,
                                   const MonteCarloConfig& cfg) {
    require_alpha(alpha);
    validate_mc(cfg);
    require(summaries.size() >= 2, "global test needs at least two centres");
    require_distinct_ids(summaries);
    auto all = canonical(summaries);
    require_equal_p(all);
    require_equal_n(all);

    const std::size_t k = all.size();
    AggregatedEstimate agg = aee_aggregate(all);

    double quad = 0.0;
    for (const auto& s : all) quad += (agg.V_sum * (agg.theta - s.theta)).squaredNorm();
    const double statistic = static_cast<double>(all.front().n) * quad;

    std::vector<Matrix> v_list(k), q_list(k);
    for (std::size_t i = 0; i < k; ++i) {
        v_list[i] = all[i].V;
        q_list[i] = all[i].Q;
    }
    Matrix h = build_h(v_list);
    Matrix q_bar = block_diag(q_list);

    TestResult res;
    res.statistic = statistic;
    res.alpha = alpha;
    res.weights = mixture_weights(h, q_bar);
    ChiSquareMixture mix = central_mixture(res.weights);
    res.p_value = pvalue_of(mix, statistic, cfg);
    res.reject = res.p_value < alpha;
    return res;
}

TestResult integration_test(const Block& a, const Block& b,
                            const std::vector<CentreSummary>& summaries, double alpha,
                            const MonteCarloConfig& cfg) {
    require_alpha(alpha);
    validate_mc(cfg);
    require(!a.members.empty() && !b.members.empty(), "integration test blocks must be nonempty");
    require_distinct_ids(summaries);

    std::unordered_map<std::string, const CentreSummary*> by_id;
    for (const auto& s : summaries) by_id[s.centre_id] = &s;
    auto collect = [&](const Block& blk, const char* name) {
        std::vector<CentreSummary> out;
        std::vector<std::string> ids = blk.members;
        std::sort(ids.begin(), ids.end());
        require(std::adjacent_find(ids.begin(), ids.end()) == ids.end(),
                std::string(name) + " block has duplicate members");
        for (const auto& id : ids) {
            auto it = by_id.find(id);
            require(it != by_id.end(), "unknown centre id '" + id + "'");
            out.push_back(validate_summary(*it->second));
        }
        return out;
    };
    auto sa = collect(a, "first");
    auto sb = collect(b, "second");
    for (const auto& id : a.members)
        require(std::find(b.members.begin(), b.members.end(), id) == b.members.end(),
                "integration test blocks overlap on '" + id + "'");

    std::vector<CentreSummary> joined = sa;
    joined.insert(joined.end(), sb.begin(), sb.end());
    require_equal_p(joined);
    require_equal_n(joined);
    const Eigen::Index p = joined.front().theta.size();

    AggregatedEstimate agg1 = aee_aggregate(sa);
    AggregatedEstimate agg2 = aee_aggregate(sb);
    AggregatedEstimate agg12 = combine_aggregates(agg1, agg2);

    const Vector d1 = agg12.theta - agg1.theta;
    const Vector d2 = agg12.theta - agg2.theta;
    const double quad =
        (agg12.V_sum * d1).squaredNorm() + (agg12.V_sum * d2).squaredNorm();
    const double statistic = static_cast<double>(joined.front().n) * quad;

    Matrix h(2 * p, 2 * p);
    const Matrix eye = Matrix::Identity(p, p);
    h.topLeftCorner(p, p) = eye - agg12.V_sum * spd_inverse(agg1.V_sum);
    h.topRightCorner(p, p) = eye;
    h.bottomLeftCorner(p, p) = eye;
    h.bottomRightCorner(p, p) = eye - agg12.V_sum * spd_inverse(agg2.V_sum);
    Matrix q_tilde = block_diag({agg1.Q_sum, agg2.Q_sum});

    TestResult res;
    res.statistic = statistic;
    res.alpha = alpha;
    res.weights = mixture_weights(h, q_tilde);
    ChiSquareMixture mix = central_mixture(res.weights);
    res.p_value = pvalue_of(mix, statistic, cfg);
    res.reject = res.p_value < alpha;
    return res;
}

double local_power(const std::vector<CentreSummary>& summaries,
                   const std::vector<Vector>& deltas, double alpha,
                   const MonteCarloConfig& cfg) {
    require_alpha(alpha);
    validate_mc(cfg);
    require(summaries.size() >= 2, "local_power needs at least two centres");
    require(deltas.size() == summaries.size(), "one delta per centre required");
    require_distinct_ids(summaries);

    // Keep deltas aligned while sorting into canonical order.
    std::vector<std::size_t> order(summaries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return summaries[i].centre_id < summaries[j].centre_id;
    });
    std::vector<CentreSummary> all;
    std::vector<Vector> dd;
    for (auto i : order) {
        all.push_back(validate_summary(summaries[i]));
        dd.push_back(deltas[i]);
    }
    require_equal_p(all);
    require_equal_n(all);
    const Eigen::Index p = all.front().theta.size();
    for (const auto& d : dd) {
        require(d.size() == p, "delta dimension mismatch");
        require(d.allFinite(), "delta has non-finite entries");
    }

    const std::size_t k = all.size();
    std::vector<Matrix> v_list(k), q_list(k);
    Matrix v_sum = Matrix::Zero(p, p);
    Vector v_delta_sum = Vector::Zero(p);
    for (std::size_t i = 0; i < k; ++i) {
        v_list[i] = all[i].V;
        q_list[i] = all[i].Q;
        v_sum += all[i].V;
        v_delta_sum += all[i].V * dd[i];
    }
    Vector shift(static_cast<Eigen::Index>(k) * p);
    for (std::size_t i = 0; i < k; ++i)
        shift.segment(static_cast<Eigen::Index>(i) * p, p) = v_delta_sum - v_sum * dd[i];

    Matrix h = build_h(v_list);
    Matrix q_bar = block_diag(q_list);
    ChiSquareMixture shifted = noncentral_mixture(h, q_bar, shift);
    ChiSquareMixture null_mix = shifted;  // same spectrum, no shift
    null_mix.noncentrality.resize(0);
    null_mix.offset = 0.0;
    if (null_mix.is_degenerate()) return 0.0;  // nothing to reject against
    const double q = quantile(null_mix, 1.0 - alpha, cfg);
    return survival(shifted, q, cfg);
}

}  // namespace coc
