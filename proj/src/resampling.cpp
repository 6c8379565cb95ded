#include "coc/resampling.hpp"

#include "coc/numerics.hpp"
#include "coc/rng.hpp"

namespace coc {

FitResult GlmFitter::fit(const Dataset& d, const std::string& id) const {
    return fit_glm(d, family_, id);
}
FitResult GlmFitter::fit_weighted(const Dataset& d, const Vector& w, const std::string& id) const {
    return fit_glm(d, family_, id, &w);
}

FitResult RobustFitter::fit(const Dataset& d, const std::string& id) const {
    return fit_robust(d, loss_, delta_, id);
}
FitResult RobustFitter::fit_weighted(const Dataset& d, const Vector& w,
                                     const std::string& id) const {
    return fit_robust(d, loss_, delta_, id, &w);
}

FitResult UstatFitter::fit(const Dataset& d, const std::string& id) const {
    return fit_ustat(d.X, kernel_, id);
}
FitResult UstatFitter::fit_weighted(const Dataset&, const Vector&, const std::string& id) const {
    throw ValidationError("weighted resampling is not defined for U-statistics ('" + id + "')");
}

Scheme parse_scheme(const std::string& name) {
    if (name == "nonparametric" || name == "np") return Scheme::kNonparametric;
    if (name == "weighted" || name == "wt") return Scheme::kWeighted;
    if (name == "universal" || name == "un") return Scheme::kUniversal;
    throw ValidationError("unknown scheme '" + name +
                          "' (expected nonparametric, weighted, or universal)");
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::kNonparametric: return "nonparametric";
        case Scheme::kWeighted: return "weighted";
        case Scheme::kUniversal: return "universal";
    }
    return "?";
}

namespace {
Vector np_round_attempt(const Dataset& d, const Fitter& fitter, const std::string& centre_id,
                        int r, std::uint64_t seed, int attempt) {
    RngStream rng(derive_key(seed, stream::kNpIndices, hash_label(centre_id),
                             static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(attempt)));
    const Eigen::Index n = d.X.rows();
    Dataset boot;
    boot.X.resize(n, d.X.cols());
    boot.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto j = static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(n)));
        boot.X.row(i) = d.X.row(j);
        boot.y(i) = d.y(j);
    }
    return fitter.fit(boot, centre_id).summary.theta;
}
}  // namespace

Vector np_round(const Dataset& d, const Fitter& fitter, const std::string& centre_id, int r,
                std::uint64_t seed) {
    require(r >= 1, "round index must be >= 1");
    for (int attempt = 0;; ++attempt) {
        try {
            return np_round_attempt(d, fitter, centre_id, r, seed, attempt);
        } catch (const NumericalError&) {
            if (attempt >= 2) throw;  // three attempts, then give up
        }
    }
}

Vector weighted_round(const Dataset& d, const Fitter& fitter, const std::string& centre_id, int r,
                      std::uint64_t seed) {
    require(r >= 1, "round index must be >= 1");
    RngStream rng(derive_key(seed, stream::kMultipliers, hash_label(centre_id),
                             static_cast<std::uint64_t>(r)));
    Vector w(d.X.rows());
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.next_exponential();
    return fitter.fit_weighted(d, w, centre_id).summary.theta;
}

Vector universal_round(const CentreSummary& summary, int r, std::uint64_t seed) {
    require(r >= 1, "round index must be >= 1");
    CentreSummary s = validate_summary(summary);
    Matrix v_inv = spd_inverse(s.V);
    Matrix sandwich = v_inv * s.Q * v_inv;
    Matrix l = psd_sqrt(0.5 * (sandwich + sandwich.transpose()));
    RngStream rng(derive_key(seed, stream::kUniversal, hash_label(s.centre_id),
                             static_cast<std::uint64_t>(r)));
    Vector z(s.theta.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.next_gaussian();
    return s.theta + l * z / std::sqrt(static_cast<double>(s.n));
}

namespace {
void check_scheme_cfg(const SchemeConfig& cfg) {
    require(cfg.rounds >= 1, "rounds must be >= 1");
}
}  // namespace

RoundSet make_roundset(const std::vector<std::pair<std::string, Dataset>>& centres,
                       const Fitter& fitter, const SchemeConfig& cfg) {
    check_scheme_cfg(cfg);
    require(!centres.empty(), "no centres given");

    RoundSet rs;
    for (const auto& [id, data] : centres)
        rs.base.push_back(validate_summary(fitter.fit(data, id).summary));
    require_distinct_ids(rs.base);

    rs.rounds.resize(static_cast<std::size_t>(cfg.rounds));
    for (int r = 1; r <= cfg.rounds; ++r) {
        auto& round = rs.rounds[static_cast<std::size_t>(r - 1)];
        round.reserve(centres.size());
        for (std::size_t k = 0; k < centres.size(); ++k) {
            const auto& [id, data] = centres[k];
            switch (cfg.scheme) {
                case Scheme::kNonparametric:
                    round.push_back(np_round(data, fitter, id, r, cfg.seed));
                    break;
                case Scheme::kWeighted:
                    round.push_back(weighted_round(data, fitter, id, r, cfg.seed));
                    break;
                case Scheme::kUniversal:
                    round.push_back(universal_round(rs.base[k], r, cfg.seed));
                    break;
            }
        }
    }
    validate_roundset(rs);
    return rs;
}

RoundSet make_roundset(const std::vector<CentreSummary>& summaries, const SchemeConfig& cfg) {
    check_scheme_cfg(cfg);
    require(cfg.scheme == Scheme::kUniversal,
            "only the universal scheme can run from summaries alone; "
            "nonparametric and weighted need raw data");
    RoundSet rs;
    for (const auto& s : summaries) rs.base.push_back(validate_summary(s));
    require_distinct_ids(rs.base);
    rs.rounds.resize(static_cast<std::size_t>(cfg.rounds));
    for (int r = 1; r <= cfg.rounds; ++r) {
        auto& round = rs.rounds[static_cast<std::size_t>(r - 1)];
        for (const auto& s : rs.base) round.push_back(universal_round(s, r, cfg.seed));
    }
    validate_roundset(rs);
    return rs;
}

}  // namespace coc
