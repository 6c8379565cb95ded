#include "coc/metrics.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace coc {

namespace {
// Contingency counts: rows = truth clusters, cols = estimated blocks.
Matrix contingency(const LabelMap& truth, const Partition& est) {
    std::size_t covered = 0;
    std::map<int, int> label_row;
    for (const auto& [id, lab] : truth)
        label_row.emplace(lab, static_cast<int>(label_row.size()));

    Matrix tab = Matrix::Zero(static_cast<Eigen::Index>(label_row.size()),
                              static_cast<Eigen::Index>(est.blocks.empty() ? 1 : est.blocks.size()));
    for (std::size_t b = 0; b < est.blocks.size(); ++b) {
        for (const auto& id : est.blocks[b].members) {
            auto it = truth.find(id);
            require(it != truth.end(), "no reference label for centre '" + id + "'");
            tab(label_row.at(it->second), static_cast<Eigen::Index>(b)) += 1.0;
            ++covered;
        }
    }
    require(covered == truth.size(), "partition does not cover the labelled centres");
    return tab;
}

inline double choose2(double x) { return 0.5 * x * (x - 1.0); }

// Min-cost perfect assignment via potentials (Jonker-style), O(n^3).
std::vector<int> hungarian_min(const Matrix& cost) {
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = match[static_cast<std::size_t>(j0)];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}
}  // namespace

std::vector<int> hungarian_max(const Matrix& score) {
    require(score.rows() == score.cols() && score.rows() > 0,
            "assignment matrix must be square and nonempty");
    const double top = score.maxCoeff();
    Matrix cost = Matrix::Constant(score.rows(), score.cols(), top) - score;
    return hungarian_min(cost);
}

double ari(const LabelMap& truth, const Partition& est) {
    require(!truth.empty(), "empty reference labels");
    Matrix tab = contingency(truth, est);
    const double n = tab.sum();
    double index = 0.0;
    for (Eigen::Index i = 0; i < tab.rows(); ++i)
        for (Eigen::Index j = 0; j < tab.cols(); ++j) index += choose2(tab(i, j));
    double row_marg = 0.0, col_marg = 0.0;
    for (Eigen::Index i = 0; i < tab.rows(); ++i) row_marg += choose2(tab.row(i).sum());
    for (Eigen::Index j = 0; j < tab.cols(); ++j) col_marg += choose2(tab.col(j).sum());
    const double expected = row_marg * col_marg / choose2(n);
    const double maximum = 0.5 * (row_marg + col_marg);
    if (maximum == expected) return 1.0;  // both trivial partitions: identical
    return (index - expected) / (maximum - expected);
}

double best_match_accuracy(const LabelMap& truth, const Partition& est) {
    require(!truth.empty(), "empty reference labels");
    Matrix tab = contingency(truth, est);
    const Eigen::Index s = std::max(tab.rows(), tab.cols());
    Matrix padded = Matrix::Zero(s, s);
    padded.topLeftCorner(tab.rows(), tab.cols()) = tab;
    const auto assign = hungarian_max(padded);
    double matched = 0.0;
    for (Eigen::Index i = 0; i < s; ++i)
        matched += padded(i, assign[static_cast<std::size_t>(i)]);
    return matched / tab.sum();
}

}  // namespace coc
