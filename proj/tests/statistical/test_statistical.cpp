// Monte Carlo checks of the distributional claims: test level, p-value
// uniformity, predicted vs. realized power, resampling covariance, and
// end-to-end cluster recovery. Seeds are frozen, so every number asserted
// here is deterministic; tolerances leave >= 3 sigma of Monte Carlo slack
// at the chosen replication counts unless a comment says otherwise.
#include "doctest.h"

#include "coc/experiments.hpp"
#include "coc/hypotests.hpp"
#include "coc/metrics.hpp"
#include "coc/models.hpp"
#include "coc/numerics.hpp"
#include "coc/resampling.hpp"
#include "coc/rng.hpp"

#include "support/helpers.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

using namespace coc;
using namespace testsupport;

namespace {

// Logistic summaries for K centres sharing one coefficient vector.
std::vector<CentreSummary> homogeneous_logistic_fits(const Vector& beta, int k_centres, long n,
                                                     std::uint64_t data_key) {
    std::vector<CentreSummary> out;
    out.reserve(static_cast<std::size_t>(k_centres));
    for (int k = 0; k < k_centres; ++k) {
        Dataset d = logistic_data(beta, n, derive_key(data_key, static_cast<std::uint64_t>(k)));
        FitResult fit = fit_glm(d, Family::kLogistic, std::to_string(k + 1));
        REQUIRE(fit.diagnostics.converged);
        out.push_back(fit.summary);
    }
    return out;
}

}  // namespace

TEST_CASE("global homogeneity test holds its nominal level on logistic fits") {
    // 18 centres in one homogeneous population; every rejection is a false
    // positive. 1000 replications give a binomial sd of 0.0069 at the nominal
    // 0.05, so the asserted window [0.03, 0.07] leaves room for both Monte
    // Carlo noise and the finite-sample (n = 2000) distortion of the level.
    Vector beta(3);
    beta << -0.70, 0.45, -0.35;
    const int kCentres = 18;
    const long n = 2000;
    const int reps = 1000;
    const std::uint64_t base = 0x11CE7A11u;

    int rejections = 0;
    for (int rep = 0; rep < reps; ++rep) {
        auto summaries = homogeneous_logistic_fits(
            beta, kCentres, n, derive_key(base, static_cast<std::uint64_t>(rep)));
        MonteCarloConfig mc{20000, derive_key(base ^ 0x5EEDull, static_cast<std::uint64_t>(rep))};
        TestResult res = global_homogeneity_test(summaries, 0.05, mc);
        if (res.reject) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / reps;
    MESSAGE("null rejection rate = " << rate);
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.07);
}

TEST_CASE("null p-values are uniform (Kolmogorov-Smirnov)") {
    // Small system (K = 3, p = 2) at n = 5000 so the limiting law is close.
    // KS critical value at the 1% level for 2000 replications is
    // 1.6276 / sqrt(2000) = 0.0364; the Monte Carlo granularity of the
    // p-values themselves (1/20000) is negligible against that.
    Vector beta(2);
    beta << 0.40, -0.25;
    const int kCentres = 3;
    const long n = 5000;
    const int reps = 2000;
    const std::uint64_t seed0 = 0xD15Cull;

    std::vector<double> pvals;
    pvals.reserve(reps);
    for (int rep = 0; rep < reps; ++rep) {
        auto summaries = homogeneous_logistic_fits(
            beta, kCentres, n, derive_key(seed0, static_cast<std::uint64_t>(rep)));
        MonteCarloConfig mc{20000, derive_key(seed0 ^ 0xFEEDull, static_cast<std::uint64_t>(rep))};
        TestResult res = global_homogeneity_test(summaries, 0.05, mc);
        pvals.push_back(res.p_value);
    }
    std::sort(pvals.begin(), pvals.end());
    double ks = 0.0;
    for (int i = 0; i < reps; ++i) {
        const double u = pvals[static_cast<std::size_t>(i)];
        const double lo = static_cast<double>(i) / reps;
        const double hi = static_cast<double>(i + 1) / reps;
        ks = std::max(ks, std::max(u - lo, hi - u));
    }
    MESSAGE("KS distance = " << ks);
    CHECK(ks < 1.6276 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("local power prediction matches realized power in the limit model") {
    // In the Gaussian limit model (theta_k drawn exactly from
    // N(theta0 + delta_k / sqrt(n), V^-1 Q V^-1 / n) with V, Q known) the
    // noncentral mixture law of the statistic is exact, so predicted and
    // realized power differ only by Monte Carlo error: binomial sd at 3000
    // replications is <= 0.0091, and the prediction itself uses 200000 draws.
    const int kCentres = 3;
    const int p = 2;
    const long n = 4000;
    Vector theta0(p);
    theta0 << 0.30, -0.20;

    RngStream spd_rng(20260816u);
    std::vector<CentreSummary> summaries;
    std::vector<Matrix> roots;  // Cholesky-like factors of V^-1 Q V^-1
    for (int k = 0; k < kCentres; ++k) {
        CentreSummary s;
        s.centre_id = std::to_string(k + 1);
        s.n = n;
        s.theta = theta0;
        s.V = random_spd(spd_rng, p);
        s.Q = random_spd(spd_rng, p);
        summaries.push_back(s);
        Matrix vinv = spd_inverse(s.V);
        Matrix w = vinv * s.Q * vinv;
        roots.push_back(psd_sqrt(0.5 * (w + w.transpose())));
    }
    std::vector<Vector> deltas(kCentres, Vector::Zero(p));
    deltas[1] << 1.5, 0.0;
    deltas[2] << 0.0, -2.0;

    MonteCarloConfig power_mc{200000, 97};
    const double predicted = local_power(summaries, deltas, 0.05, power_mc);
    MESSAGE("predicted power = " << predicted);
    CHECK(predicted > 0.10);  // informative regime, away from both 0.05 and 1
    CHECK(predicted < 0.98);

    const int reps = 3000;
    const double root_n = std::sqrt(static_cast<double>(n));
    int rejections = 0;
    for (int rep = 0; rep < reps; ++rep) {
        RngStream noise(derive_key(0xCAFEull, static_cast<std::uint64_t>(rep)));
        std::vector<CentreSummary> drawn = summaries;
        for (int k = 0; k < kCentres; ++k) {
            Vector z(p);
            for (int j = 0; j < p; ++j) z(j) = noise.next_gaussian();
            drawn[static_cast<std::size_t>(k)].theta =
                theta0 + deltas[static_cast<std::size_t>(k)] / root_n +
                (roots[static_cast<std::size_t>(k)] * z) / root_n;
        }
        MonteCarloConfig mc{20000, derive_key(0xBEEFull, static_cast<std::uint64_t>(rep))};
        TestResult res = global_homogeneity_test(drawn, 0.05, mc);
        if (res.reject) ++rejections;
    }
    const double realized = static_cast<double>(rejections) / reps;
    MESSAGE("realized power = " << realized);
    CHECK(std::abs(realized - predicted) <= 0.025);
}

TEST_CASE("resampled estimates reproduce the sandwich covariance") {
    // One logistic dataset (n = 5000, p = 3); for each scheme the round bank
    // should scatter like N(theta_hat, V^-1 Q V^-1 / n). With 800 rounds the
    // Monte Carlo sd of a variance ratio is sqrt(2/800) = 5%, so the 20%
    // bound on the diagonal is ~4 sigma; the mean Mahalanobis distance has
    // sd sqrt(2p)/sqrt(800) = 0.087, so the 12% (= 0.36) bound is ~4 sigma.
    Vector beta(3);
    beta << -0.70, 0.45, -0.35;
    const long n = 5000;
    const int rounds = 800;
    Dataset d = logistic_data(beta, n, 0xAB5EEDull);
    GlmFitter fitter(Family::kLogistic);
    FitResult base = fitter.fit(d, "1");
    REQUIRE(base.diagnostics.converged);
    const CentreSummary& s = base.summary;

    Matrix vinv = spd_inverse(s.V);
    Matrix target = (vinv * s.Q * vinv) / static_cast<double>(n);
    target = 0.5 * (target + target.transpose());
    Matrix target_inv = spd_inverse(target);

    for (Scheme scheme : {Scheme::kNonparametric, Scheme::kWeighted, Scheme::kUniversal}) {
        CAPTURE(scheme_name(scheme));
        std::vector<Vector> bank;
        bank.reserve(rounds);
        for (int r = 1; r <= rounds; ++r) {
            switch (scheme) {
                case Scheme::kNonparametric:
                    bank.push_back(np_round(d, fitter, "1", r, 404));
                    break;
                case Scheme::kWeighted:
                    bank.push_back(weighted_round(d, fitter, "1", r, 404));
                    break;
                case Scheme::kUniversal:
                    bank.push_back(universal_round(s, r, 404));
                    break;
            }
        }
        Vector mean = Vector::Zero(3);
        for (const Vector& t : bank) mean += t;
        mean /= static_cast<double>(rounds);
        Matrix cov = Matrix::Zero(3, 3);
        double mahal = 0.0;
        for (const Vector& t : bank) {
            Vector c = t - mean;
            cov += c * c.transpose();
            mahal += c.dot(target_inv * c);
        }
        cov /= static_cast<double>(rounds - 1);
        mahal /= static_cast<double>(rounds);

        for (int j = 0; j < 3; ++j) {
            const double ratio = cov(j, j) / target(j, j);
            CAPTURE(j);
            MESSAGE("diag ratio = " << ratio);
            CHECK(ratio > 0.80);
            CHECK(ratio < 1.20);
        }
        MESSAGE("mean Mahalanobis = " << mahal);
        CHECK(std::abs(mahal - 3.0) <= 0.36);
    }
}

TEST_CASE("cluster recovery improves with n and is near-perfect by n = 2000") {
    // Two clusters of three centres, coefficients separated by the default
    // shift. By n = 2000 the per-coordinate separation is tens of standard
    // errors, so failures can only come from false splits; the plateau replay
    // gives those repeated chances to heal, keeping exact recovery high.
    SimConfig sim;
    sim.cluster_sizes = {3, 3};
    const double alpha = 0.05;
    const int reps = 120;
    GlmFitter fitter(Family::kLogistic);

    std::vector<long> grid{800, 2000};
    std::vector<double> mean_ari(grid.size(), 0.0);
    std::vector<int> exact(grid.size(), 0);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const long n = grid[gi];
        for (int rep = 0; rep < reps; ++rep) {
            SimulatedCentres data = simulate_centres(sim, n, 515, rep);
            SchemeConfig scheme_cfg{Scheme::kWeighted, 12,
                                    derive_key(911, static_cast<std::uint64_t>(rep))};
            RoundSet rs = make_roundset(data.centres, fitter, scheme_cfg);
            MonteCarloConfig mc{5000, derive_key(313, static_cast<std::uint64_t>(rep))};
            const long window = resolve_window(WindowRule{}, sim_total_centres(sim));
            CocTrace trace = cyclic_coc(rs, alpha, window, mc);
            const double a = ari(data.labels, trace.partition);
            mean_ari[gi] += a;
            if (a == 1.0) ++exact[gi];
        }
        mean_ari[gi] /= reps;
        MESSAGE("n = " << n << ": mean ARI = " << mean_ari[gi]
                       << ", exact recovery = " << exact[gi] << "/" << reps);
    }
    CHECK(mean_ari[1] >= 0.90);
    CHECK(static_cast<double>(exact[1]) / reps >= 0.85);
    CHECK(mean_ari[1] >= mean_ari[0] - 0.02);
}

TEST_CASE("replication sweep runs the full pipeline at the default scale") {
    // Three universal-scheme replications of the 18-centre configuration:
    // exercises simulate -> fit -> resample -> cluster -> score end to end
    // and checks the scoring summary aggregates only successful rows.
    ExperimentConfig cfg;
    cfg.n_grid = {800};
    cfg.schemes = {Scheme::kUniversal};
    cfg.mc_reps = 3;
    cfg.rounds = 8;
    cfg.window = WindowRule{WindowRule::Mode::kFixed, 6};
    cfg.draws = 5000;
    cfg.seed = 2026;
    cfg.jobs = 1;

    std::vector<McRecord> records = run_mc(cfg);
    REQUIRE(records.size() == 3);
    double ari_sum = 0.0;
    for (const McRecord& r : records) {
        CAPTURE(r.rep);
        REQUIRE_FALSE(r.failed);
        CHECK(r.scheme == "universal");
        CHECK(r.n == 800);
        CHECK(r.ari >= -1.0);
        CHECK(r.ari <= 1.0);
        CHECK(r.rounds >= 1);
        CHECK(r.wall_ms > 0.0);
        ari_sum += r.ari;
    }
    MESSAGE("mean ARI over 3 reps = " << ari_sum / 3.0);
    CHECK(ari_sum / 3.0 >= 0.70);

    std::vector<McSummaryRow> rows = summarize_mc(records);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].n == 800);
    CHECK(rows[0].scheme == "universal");
    CHECK(rows[0].ari_mean == doctest::Approx(ari_sum / 3.0).epsilon(1e-12));
}
