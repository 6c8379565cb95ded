#pragma once

#include "coc/cluster.hpp"
#include "coc/models.hpp"

#include <memory>

namespace coc {

// Uniform refit interface so every resampling scheme can drive any model.
class Fitter {
public:
    virtual ~Fitter() = default;
    virtual FitResult fit(const Dataset& d, const std::string& centre_id) const = 0;
    // Multiplier-weighted refit; throws ValidationError where undefined.
    virtual FitResult fit_weighted(const Dataset& d, const Vector& w,
                                   const std::string& centre_id) const = 0;
};

class GlmFitter : public Fitter {
public:
    explicit GlmFitter(Family family) : family_(family) {}
    FitResult fit(const Dataset& d, const std::string& id) const override;
    FitResult fit_weighted(const Dataset& d, const Vector& w, const std::string& id) const override;

private:
    Family family_;
};

class RobustFitter : public Fitter {
public:
    RobustFitter(RobustLoss loss, double delta) : loss_(loss), delta_(delta) {}
    FitResult fit(const Dataset& d, const std::string& id) const override;
    FitResult fit_weighted(const Dataset& d, const Vector& w, const std::string& id) const override;

private:
    RobustLoss loss_;
    double delta_;
};

// Treats d.X rows as the sample; y is ignored. No weighted variant exists.
class UstatFitter : public Fitter {
public:
    explicit UstatFitter(UKernel kernel) : kernel_(std::move(kernel)) {}
    FitResult fit(const Dataset& d, const std::string& id) const override;
    FitResult fit_weighted(const Dataset& d, const Vector& w, const std::string& id) const override;

private:
    UKernel kernel_;
};

enum class Scheme { kNonparametric, kWeighted, kUniversal };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);

struct SchemeConfig {
    Scheme scheme = Scheme::kUniversal;
    int rounds = 40;
    std::uint64_t seed = 0;
};

// One theta re-estimate for round r (1-based). Streams derive from
// (seed, purpose, centre id, r), so rounds and centres never share draws.
Vector np_round(const Dataset& d, const Fitter& fitter, const std::string& centre_id, int r,
                std::uint64_t seed);
Vector weighted_round(const Dataset& d, const Fitter& fitter, const std::string& centre_id, int r,
                      std::uint64_t seed);
// theta + n^{-1/2} L z with L L' = V^{-1} Q V^{-1} and z standard normal.
Vector universal_round(const CentreSummary& summary, int r, std::uint64_t seed);

// Fits every centre once (fixing theta, V, Q, n), then fills `rounds` theta
// banks with the chosen scheme. Nonparametric refits retry a failed round up
// to 3 times on fresh sub-streams before giving up.
RoundSet make_roundset(const std::vector<std::pair<std::string, Dataset>>& centres,
                       const Fitter& fitter, const SchemeConfig& cfg);

// Universal scheme needs only the summaries.
RoundSet make_roundset(const std::vector<CentreSummary>& summaries, const SchemeConfig& cfg);

}  // namespace coc
