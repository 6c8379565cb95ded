#include "coc/summaries.hpp"

#include "coc/numerics.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <set>
#include <sstream>

namespace coc {

std::vector<std::string> summary_violations(const CentreSummary& s) {
    std::vector<std::string> bad;
    if (s.centre_id.empty()) bad.push_back("centre_id is empty");
    if (s.n <= 0) bad.push_back("n must be positive");
    const auto p = s.theta.size();
    if (p == 0) bad.push_back("theta is empty");
    if (!s.theta.allFinite()) bad.push_back("theta has non-finite entries");
    if (s.V.rows() != p || s.V.cols() != p) bad.push_back("V shape does not match theta");
    if (s.Q.rows() != p || s.Q.cols() != p) bad.push_back("Q shape does not match theta");
    if (!s.V.allFinite()) bad.push_back("V has non-finite entries");
    if (!s.Q.allFinite()) bad.push_back("Q has non-finite entries");
    if (!bad.empty()) return bad;

    if (!is_symmetric(s.V)) bad.push_back("V is not symmetric");
    if (!is_symmetric(s.Q)) bad.push_back("Q is not symmetric");
    if (!bad.empty()) return bad;

    Eigen::LLT<Matrix> llt(0.5 * (s.V + s.V.transpose()));
    if (llt.info() != Eigen::Success) bad.push_back("V is not positive definite");
    SymEigen qe = sym_eigen(s.Q);
    if (qe.values.minCoeff() < -kPsdClamp * s.Q.norm())
        bad.push_back("Q is not positive semidefinite");
    if (qe.values.maxCoeff() <= 0.0) bad.push_back("Q is zero");
    return bad;
}

CentreSummary validate_summary(const CentreSummary& s) {
    auto bad = summary_violations(s);
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "summary '" << s.centre_id << "': ";
        for (std::size_t i = 0; i < bad.size(); ++i) msg << (i ? "; " : "") << bad[i];
        throw ValidationError(msg.str());
    }
    CentreSummary out = s;
    out.V = 0.5 * (s.V + s.V.transpose());
    out.Q = 0.5 * (s.Q + s.Q.transpose());
    return out;
}

Block make_block(std::vector<std::string> members) {
    require(!members.empty(), "block must be nonempty");
    std::sort(members.begin(), members.end());
    require(std::adjacent_find(members.begin(), members.end()) == members.end(),
            "block has duplicate members");
    return Block{std::move(members)};
}

Block merge_blocks(const Block& a, const Block& b) {
    std::vector<std::string> all = a.members;
    all.insert(all.end(), b.members.begin(), b.members.end());
    std::sort(all.begin(), all.end());
    require(std::adjacent_find(all.begin(), all.end()) == all.end(),
            "merge_blocks: blocks are not disjoint");
    return Block{std::move(all)};
}

void validate_partition(const Partition& part, const std::vector<std::string>& universe) {
    std::set<std::string> seen;
    std::size_t total = 0;
    for (const auto& b : part.blocks) {
        require(!b.members.empty(), "partition has an empty block");
        for (const auto& id : b.members) {
            require(seen.insert(id).second, "partition blocks overlap on '" + id + "'");
        }
        total += b.members.size();
    }
    require(total == universe.size(), "partition does not cover the centre set");
    for (const auto& id : universe)
        require(seen.count(id) == 1, "partition is missing centre '" + id + "'");
}

void require_equal_p(const std::vector<CentreSummary>& all) {
    require(!all.empty(), "no summaries given");
    const auto p = all.front().theta.size();
    for (const auto& s : all)
        require(s.theta.size() == p, "summaries disagree on dimension p ('" + s.centre_id + "')");
}

void require_equal_n(const std::vector<CentreSummary>& all) {
    require(!all.empty(), "no summaries given");
    const long n = all.front().n;
    for (const auto& s : all)
        require(s.n == n, "summaries disagree on per-centre n ('" + s.centre_id + "')");
}

void require_distinct_ids(const std::vector<CentreSummary>& all) {
    std::set<std::string> seen;
    for (const auto& s : all)
        require(seen.insert(s.centre_id).second, "duplicate centre id '" + s.centre_id + "'");
}

AggregatedEstimate aee_aggregate(const std::vector<CentreSummary>& members) {
    require_equal_p(members);
    // Accumulate in centre-id order so the result is exactly (bitwise)
    // invariant under permutations of the input list.
    std::vector<const CentreSummary*> ordered;
    ordered.reserve(members.size());
    for (const auto& s : members) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const CentreSummary* a, const CentreSummary* b) {
                  return a->centre_id < b->centre_id;
              });
    const auto p = members.front().theta.size();
    Matrix v_sum = Matrix::Zero(p, p);
    Matrix q_sum = Matrix::Zero(p, p);
    Vector rhs = Vector::Zero(p);
    for (const CentreSummary* raw : ordered) {
        CentreSummary s = validate_summary(*raw);
        v_sum += s.V;
        q_sum += s.Q;
        rhs += s.V * s.theta;
    }
    AggregatedEstimate out;
    out.V_sum = v_sum;
    out.Q_sum = q_sum;
    out.theta = spd_solve(v_sum, rhs);
    Matrix inv = spd_inverse(v_sum);
    Matrix w = inv * q_sum * inv;
    out.W = 0.5 * (w + w.transpose());
    return out;
}

AggregatedEstimate combine_aggregates(const AggregatedEstimate& a, const AggregatedEstimate& b) {
    require(a.theta.size() == b.theta.size(), "combine_aggregates: dimension mismatch");
    AggregatedEstimate out;
    out.V_sum = a.V_sum + b.V_sum;
    out.Q_sum = a.Q_sum + b.Q_sum;
    out.theta = spd_solve(out.V_sum, a.V_sum * a.theta + b.V_sum * b.theta);
    Matrix inv = spd_inverse(out.V_sum);
    Matrix w = inv * out.Q_sum * inv;
    out.W = 0.5 * (w + w.transpose());
    return out;
}

}  // namespace coc
