#pragma once

#include "coc/metrics.hpp"
#include "coc/models.hpp"
#include "coc/resampling.hpp"

#include <string>
#include <utility>
#include <vector>

namespace coc {

// Synthetic multi-centre logistic design: X ~ N(0, I), intercept prepended,
// cluster g shifts coefficient g (0-based, i.e. the g-th covariate) by `shift`.
struct SimConfig {
    std::vector<int> cluster_sizes{5, 4, 9};
    Vector beta_base;  // defaults to the 8-dim profile below when empty
    double shift = 1.2;
};

Vector default_beta_base();
void validate_sim_config(const SimConfig& cfg);
int sim_total_centres(const SimConfig& cfg);

struct SimulatedCentres {
    std::vector<std::pair<std::string, Dataset>> centres;  // ids "1".."K"
    LabelMap labels;                                       // cluster index per id, 1-based
};

SimulatedCentres simulate_centres(const SimConfig& cfg, long n, std::uint64_t seed, int rep);

struct ExperimentConfig {
    SimConfig sim;
    std::vector<long> n_grid{800, 2000, 5000};
    std::vector<Scheme> schemes{Scheme::kNonparametric, Scheme::kWeighted, Scheme::kUniversal};
    int mc_reps = 200;
    int rounds = 40;
    WindowRule window;
    double alpha = 0.05;
    long draws = 100000;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct McRecord {
    long n = 0;
    std::string scheme;
    int rep = 0;
    bool failed = false;
    std::string error;
    double ari = 0.0;
    double accuracy = 0.0;
    int rounds = 0;  // first round of the certified plateau
    double wall_ms = 0.0;
};

struct McSummaryRow {
    long n = 0;
    std::string scheme;
    double ari_mean = 0.0, ari_sd = 0.0;
    double rounds_mean = 0.0, rounds_sd = 0.0;
};

// Full replication sweep: simulate, fit, resample, cluster, score. Failures
// are recorded per replication, never fatal. Records come back sorted by
// (n, scheme, rep) regardless of the worker schedule.
std::vector<McRecord> run_mc(const ExperimentConfig& cfg);

std::vector<McSummaryRow> summarize_mc(const std::vector<McRecord>& records);

void write_metrics_csv(const std::vector<McRecord>& records, const std::string& path);
void write_summary_csv(const std::vector<McSummaryRow>& rows, const std::string& path);

// Mean +/- sd per scheme over the n grid, as a small self-contained SVG.
void write_fig_svg(const std::vector<McSummaryRow>& rows, const std::string& metric,
                   const std::string& path);

}  // namespace coc
