#include "coc/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace coc {

namespace {

// Index-based view of a partition; blocks keep their members sorted and the
// block list is ordered by smallest member index.
using IndexBlocks = std::vector<std::vector<int>>;

void sort_blocks(IndexBlocks& blocks) {
    for (auto& b : blocks) std::sort(b.begin(), b.end());
    std::sort(blocks.begin(), blocks.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) {
                  return a.front() < b.front();
              });
}

Block to_id_block(const std::vector<int>& idx, const std::vector<CentreSummary>& base) {
    std::vector<std::string> ids;
    ids.reserve(idx.size());
    for (int i : idx) ids.push_back(base[static_cast<std::size_t>(i)].centre_id);
    return make_block(std::move(ids));
}

Partition to_partition(IndexBlocks blocks, const std::vector<CentreSummary>& base) {
    sort_blocks(blocks);
    Partition part;
    for (const auto& b : blocks) part.blocks.push_back(to_id_block(b, base));
    return part;
}

// Sequential insertion pass shared by one_shot (singleton units) and the
// re-merge rounds (previous blocks as units). Units arrive in order; each one
// is tested against every block accepted so far.
IndexBlocks merge_units(const IndexBlocks& units, const std::vector<CentreSummary>& summaries,
                        double alpha, const MonteCarloConfig& cfg) {
    IndexBlocks blocks;
    for (const auto& unit : units) {
        if (blocks.empty()) {
            blocks.push_back(unit);
            continue;
        }
        double best_p = -1.0;
        std::size_t best_at = 0;
        Block unit_block = to_id_block(unit, summaries);
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            TestResult r = integration_test(to_id_block(blocks[b], summaries), unit_block,
                                            summaries, alpha, cfg);
            if (r.p_value >= alpha && r.p_value > best_p) {
                best_p = r.p_value;
                best_at = b;
            }
        }
        if (best_p >= alpha) {
            auto& dst = blocks[best_at];
            dst.insert(dst.end(), unit.begin(), unit.end());
            std::sort(dst.begin(), dst.end());
        } else {
            blocks.push_back(unit);
        }
    }
    return blocks;
}

std::vector<CentreSummary> with_thetas(const std::vector<CentreSummary>& base,
                                       const std::vector<Vector>& thetas) {
    std::vector<CentreSummary> out = base;
    for (std::size_t k = 0; k < out.size(); ++k) out[k].theta = thetas[k];
    return out;
}

IndexBlocks one_shot_index(const std::vector<CentreSummary>& summaries, double alpha,
                           const MonteCarloConfig& cfg) {
    const int k = static_cast<int>(summaries.size());
    if (k == 1) return {{0}};
    TestResult global = global_homogeneity_test(summaries, alpha, cfg);
    if (global.p_value >= alpha) {
        std::vector<int> all(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) all[static_cast<std::size_t>(i)] = i;
        return {all};
    }
    IndexBlocks singletons;
    for (int i = 0; i < k; ++i) singletons.push_back({i});
    return merge_units(singletons, summaries, alpha, cfg);
}

void check_inputs(const std::vector<CentreSummary>& summaries) {
    require(!summaries.empty(), "no summaries given");
    require_distinct_ids(summaries);
    require_equal_p(summaries);
    require_equal_n(summaries);
}

}  // namespace

void validate_roundset(const RoundSet& rs) {
    check_inputs(rs.base);
    require(!rs.rounds.empty(), "roundset needs at least one round");
    const auto p = rs.base.front().theta.size();
    for (const auto& round : rs.rounds) {
        require(round.size() == rs.base.size(), "round does not cover every centre");
        for (const auto& th : round) {
            require(th.size() == p, "round theta dimension mismatch");
            require(th.allFinite(), "round theta has non-finite entries");
        }
    }
}

Partition one_shot_coc(const std::vector<CentreSummary>& summaries, double alpha,
                       const MonteCarloConfig& cfg) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
    check_inputs(summaries);
    std::vector<CentreSummary> validated;
    validated.reserve(summaries.size());
    for (const auto& s : summaries) validated.push_back(validate_summary(s));
    Partition part = to_partition(one_shot_index(validated, alpha, cfg), validated);
    std::vector<std::string> universe;
    for (const auto& s : validated) universe.push_back(s.centre_id);
    validate_partition(part, universe);
    return part;
}

namespace {

struct RoundDriver {
    const RoundSet& rs;
    double alpha;
    MonteCarloConfig cfg;
    CocTrace trace;
    IndexBlocks blocks;

    void run_round(int replicate) {
        const auto& thetas = rs.rounds[static_cast<std::size_t>(replicate - 1)];
        auto summaries = with_thetas(rs.base, thetas);
        if (trace.sizes.empty()) {
            blocks = one_shot_index(summaries, alpha, cfg);
        } else {
            sort_blocks(blocks);
            blocks = merge_units(blocks, summaries, alpha, cfg);
        }
        const int size = static_cast<int>(blocks.size());
        const int run = (!trace.sizes.empty() && trace.sizes.back() == size)
                            ? trace.runlen.back() + 1
                            : 1;
        trace.sizes.push_back(size);
        trace.runlen.push_back(run);
        trace.replicate_index.push_back(replicate);
    }

    CocTrace finish(const std::string& reason) {
        trace.rounds_used = static_cast<int>(trace.sizes.size());
        trace.stop_reason = reason;
        trace.partition = to_partition(blocks, rs.base);
        std::vector<std::string> universe;
        for (const auto& s : rs.base) universe.push_back(s.centre_id);
        validate_partition(trace.partition, universe);
        return std::move(trace);
    }
};

}  // namespace

CocTrace multi_round_coc(const RoundSet& rs, double alpha, const MonteCarloConfig& cfg) {
    validate_roundset(rs);
    require(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
    RoundDriver drv{rs, alpha, cfg, {}, {}};
    const int r_total = static_cast<int>(rs.rounds.size());
    for (int r = 1; r <= r_total; ++r) drv.run_round(r);
    return drv.finish("rounds_exhausted");
}

CocTrace cyclic_coc(const RoundSet& rs, double alpha, long window, const MonteCarloConfig& cfg) {
    validate_roundset(rs);
    require(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
    require(window >= 1, "window must be a positive integer");
    RoundDriver drv{rs, alpha, cfg, {}, {}};
    const long r_bank = static_cast<long>(rs.rounds.size());
    // Block counts are non-increasing, so the plateau is always reached within
    // (K+1) * window rounds; the guard only trips on an implementation bug.
    const long hard_cap = (static_cast<long>(rs.base.size()) + 1) * window + 1;
    for (long r = 1; r <= hard_cap; ++r) {
        const int replicate = static_cast<int>(1 + ((r - 1) % r_bank));
        drv.run_round(replicate);
        if (drv.trace.runlen.back() >= window) return drv.finish("plateau");
    }
    throw NumericalError("cyclic_coc: plateau not reached within the theoretical bound");
}

std::uint64_t n_max(int k) {
    require(k >= 2, "n_max requires K >= 2");
    unsigned __int128 acc = static_cast<unsigned __int128>(k) * (k - 1) / 2;
    const unsigned __int128 cap = static_cast<unsigned __int128>(UINT64_MAX);
    for (int i = 0; i < k - 2; ++i) {
        acc *= 3;
        if (acc > cap) throw NumericalError("n_max overflows 64 bits for K = " + std::to_string(k));
    }
    return static_cast<std::uint64_t>(acc);
}

int stop_window(int k) {
    require(k >= 2, "stop_window requires K >= 2");
    const double ln_nmax =
        std::log(static_cast<double>(k)) + std::log(static_cast<double>(k - 1)) -
        std::log(2.0) + (k - 2) * std::log(3.0);
    const double w = std::ceil(std::log(static_cast<double>(k)) * ln_nmax);
    return std::max(1, static_cast<int>(w));  // K = 2 would otherwise give 0
}

WindowRule parse_window_rule(const std::string& text) {
    if (text == "heuristic") return {WindowRule::Mode::kHeuristic, 0};
    if (text == "exact") return {WindowRule::Mode::kExact, 0};
    try {
        std::size_t used = 0;
        const long v = std::stol(text, &used);
        require(used == text.size() && v >= 1, "window must be a positive integer");
        return {WindowRule::Mode::kFixed, v};
    } catch (const ValidationError&) {
        throw;
    } catch (...) {
        throw ValidationError("window must be 'heuristic', 'exact', or a positive integer");
    }
}

std::string window_rule_name(const WindowRule& rule) {
    switch (rule.mode) {
        case WindowRule::Mode::kHeuristic: return "heuristic";
        case WindowRule::Mode::kExact: return "exact";
        case WindowRule::Mode::kFixed: return std::to_string(rule.value);
    }
    return "?";
}

long resolve_window(const WindowRule& rule, int k) {
    switch (rule.mode) {
        case WindowRule::Mode::kHeuristic: return stop_window(k);
        case WindowRule::Mode::kExact: {
            const std::uint64_t exact = n_max(k) + 1;
            require(exact <= static_cast<std::uint64_t>(std::numeric_limits<long>::max()),
                    "exact window does not fit a signed long");
            return static_cast<long>(exact);
        }
        case WindowRule::Mode::kFixed: return rule.value;
    }
    throw ValidationError("unknown window rule");
}

}  // namespace coc
