#include "coc/experiments.hpp"

#include "coc/parallel.hpp"
#include "coc/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace coc {

Vector default_beta_base() {
    Vector b(8);
    b << -0.70, 0.45, -0.35, 0.25, 0.10, -0.20, 0.55, -0.15;
    return b;
}

void validate_sim_config(const SimConfig& cfg) {
    require(!cfg.cluster_sizes.empty(), "cluster sizes must be nonempty");
    for (int s : cfg.cluster_sizes) require(s >= 1, "cluster sizes must be positive");
    const Vector beta = cfg.beta_base.size() ? cfg.beta_base : default_beta_base();
    require(beta.size() >= 2, "beta_base needs an intercept and at least one covariate");
    require(static_cast<Eigen::Index>(cfg.cluster_sizes.size()) < beta.size(),
            "more clusters than shiftable coefficients");
    require(std::isfinite(cfg.shift), "shift must be finite");
}

int sim_total_centres(const SimConfig& cfg) {
    int k = 0;
    for (int s : cfg.cluster_sizes) k += s;
    return k;
}

SimulatedCentres simulate_centres(const SimConfig& cfg, long n, std::uint64_t seed, int rep) {
    validate_sim_config(cfg);
    require(n >= 1, "n must be positive");
    const Vector beta_base = cfg.beta_base.size() ? cfg.beta_base : default_beta_base();
    const Eigen::Index p = beta_base.size();

    SimulatedCentres out;
    int centre_idx = 0;
    for (std::size_t g = 0; g < cfg.cluster_sizes.size(); ++g) {
        Vector beta = beta_base;
        beta(static_cast<Eigen::Index>(g) + 1) += cfg.shift;  // cluster g shifts covariate g+1
        for (int c = 0; c < cfg.cluster_sizes[g]; ++c) {
            ++centre_idx;
            const std::string id = std::to_string(centre_idx);
            RngStream rng(derive_key(seed, stream::kSimulate, static_cast<std::uint64_t>(rep),
                                     static_cast<std::uint64_t>(centre_idx)));
            Dataset d;
            d.X.resize(n, p);
            d.y.resize(n);
            for (long i = 0; i < n; ++i) {
                d.X(i, 0) = 1.0;
                for (Eigen::Index j = 1; j < p; ++j) d.X(i, j) = rng.next_gaussian();
                const double eta = d.X.row(i).dot(beta);
                const double prob = 1.0 / (1.0 + std::exp(-eta));
                d.y(i) = rng.next_double() < prob ? 1.0 : 0.0;
            }
            out.centres.emplace_back(id, std::move(d));
            out.labels[id] = static_cast<int>(g) + 1;
        }
    }
    return out;
}

namespace {
std::string csv_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct MeanSd {
    double mean = 0.0, sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
    MeanSd out;
    if (xs.empty()) return out;
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double acc = 0.0;
        for (double x : xs) acc += (x - out.mean) * (x - out.mean);
        out.sd = std::sqrt(acc / static_cast<double>(xs.size() - 1));
    }
    return out;
}
}  // namespace

std::vector<McRecord> run_mc(const ExperimentConfig& cfg) {
    validate_sim_config(cfg.sim);
    require(!cfg.n_grid.empty(), "n grid must be nonempty");
    require(!cfg.schemes.empty(), "scheme list must be nonempty");
    require(cfg.mc_reps >= 1, "mc_reps must be positive");
    require(cfg.rounds >= 1, "rounds must be positive");
    require(cfg.alpha > 0.0 && cfg.alpha < 1.0, "alpha must be in (0, 1)");

    const int k = sim_total_centres(cfg.sim);
    const long window = resolve_window(cfg.window, k);

    struct Task {
        std::size_t n_idx, sch_idx;
        int rep;
    };
    std::vector<Task> tasks;
    for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni)
        for (std::size_t si = 0; si < cfg.schemes.size(); ++si)
            for (int rep = 1; rep <= cfg.mc_reps; ++rep) tasks.push_back({ni, si, rep});

    std::vector<McRecord> records(tasks.size());
    parallel_for(tasks.size(), cfg.jobs, [&](std::size_t t) {
        const Task& tk = tasks[t];
        const long n = cfg.n_grid[tk.n_idx];
        const Scheme scheme = cfg.schemes[tk.sch_idx];
        McRecord& rec = records[t];
        rec.n = n;
        rec.scheme = scheme_name(scheme);
        rec.rep = tk.rep;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            // One sub-seed per (n, replication), shared by every scheme: schemes at
            // the same replication index see identical simulated data (common random
            // numbers, so cross-scheme contrasts are paired), while their resampling
            // draws stay independent because each scheme consumes its own stream.
            const std::uint64_t task_seed =
                derive_key(cfg.seed, stream::kReplicate, static_cast<std::uint64_t>(tk.n_idx),
                           static_cast<std::uint64_t>(tk.rep));
            SimulatedCentres sim = simulate_centres(cfg.sim, n, task_seed, tk.rep);
            GlmFitter fitter(Family::kLogistic);
            SchemeConfig sc{scheme, cfg.rounds, task_seed};
            RoundSet rs = make_roundset(sim.centres, fitter, sc);
            MonteCarloConfig mc{cfg.draws, task_seed};
            CocTrace trace = cyclic_coc(rs, cfg.alpha, window, mc);
            rec.ari = ari(sim.labels, trace.partition);
            rec.accuracy = best_match_accuracy(sim.labels, trace.partition);
            rec.rounds = trace.stop_reason == "plateau"
                             ? trace.rounds_used - static_cast<int>(window) + 1
                             : trace.rounds_used;
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
        }
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    });

    std::sort(records.begin(), records.end(), [](const McRecord& a, const McRecord& b) {
        if (a.n != b.n) return a.n < b.n;
        if (a.scheme != b.scheme) return a.scheme < b.scheme;
        return a.rep < b.rep;
    });
    return records;
}

std::vector<McSummaryRow> summarize_mc(const std::vector<McRecord>& records) {
    std::map<std::pair<long, std::string>, std::pair<std::vector<double>, std::vector<double>>>
        cells;
    for (const auto& r : records) {
        if (r.failed) continue;
        auto& cell = cells[{r.n, r.scheme}];
        cell.first.push_back(r.ari);
        cell.second.push_back(static_cast<double>(r.rounds));
    }
    std::vector<McSummaryRow> rows;
    for (const auto& [key, cell] : cells) {
        McSummaryRow row;
        row.n = key.first;
        row.scheme = key.second;
        const MeanSd a = mean_sd(cell.first);
        const MeanSd r = mean_sd(cell.second);
        row.ari_mean = a.mean;
        row.ari_sd = a.sd;
        row.rounds_mean = r.mean;
        row.rounds_sd = r.sd;
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(), [](const McSummaryRow& a, const McSummaryRow& b) {
        if (a.n != b.n) return a.n < b.n;
        return a.scheme < b.scheme;
    });
    return rows;
}

void write_metrics_csv(const std::vector<McRecord>& records, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "cannot open '" + path + "' for writing");
    out << "n,scheme,rep,ari,accuracy,rounds,wall_ms\n";
    for (const auto& r : records) {
        if (r.failed) {
            out << r.n << ',' << r.scheme << ',' << r.rep << ",nan,nan,nan,"
                << csv_double(r.wall_ms) << '\n';
            continue;
        }
        out << r.n << ',' << r.scheme << ',' << r.rep << ',' << csv_double(r.ari) << ','
            << csv_double(r.accuracy) << ',' << r.rounds << ',' << csv_double(r.wall_ms) << '\n';
    }
}

void write_summary_csv(const std::vector<McSummaryRow>& rows, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "cannot open '" + path + "' for writing");
    out << "n,scheme,ari_mean,ari_sd,rounds_mean,rounds_sd\n";
    for (const auto& r : rows)
        out << r.n << ',' << r.scheme << ',' << csv_double(r.ari_mean) << ','
            << csv_double(r.ari_sd) << ',' << csv_double(r.rounds_mean) << ','
            << csv_double(r.rounds_sd) << '\n';
}

void write_fig_svg(const std::vector<McSummaryRow>& rows, const std::string& metric,
                   const std::string& path) {
    require(metric == "ari" || metric == "rounds", "metric must be 'ari' or 'rounds'");
    std::vector<long> ns;
    std::vector<std::string> schemes;
    for (const auto& r : rows) {
        if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
        if (std::find(schemes.begin(), schemes.end(), r.scheme) == schemes.end())
            schemes.push_back(r.scheme);
    }
    std::sort(ns.begin(), ns.end());
    std::sort(schemes.begin(), schemes.end());

    auto value_of = [&](const McSummaryRow& r) {
        return metric == "ari" ? std::pair{r.ari_mean, r.ari_sd}
                               : std::pair{r.rounds_mean, r.rounds_sd};
    };
    double lo = 1e300, hi = -1e300;
    for (const auto& r : rows) {
        const auto [m, s] = value_of(r);
        lo = std::min(lo, m - s);
        hi = std::max(hi, m + s);
    }
    if (rows.empty()) {
        lo = 0.0;
        hi = 1.0;
    }
    const double pad = std::max(1e-9, 0.08 * (hi - lo));
    lo -= pad;
    hi += pad;

    const double w = 640, h = 420, ml = 64, mr = 150, mt = 24, mb = 48;
    auto xpos = [&](std::size_t i) {
        return ns.size() < 2 ? ml + (w - ml - mr) / 2
                             : ml + (w - ml - mr) * static_cast<double>(i) /
                                   static_cast<double>(ns.size() - 1);
    };
    auto ypos = [&](double v) { return mt + (h - mt - mb) * (1.0 - (v - lo) / (hi - lo)); };

    const std::vector<std::string> palette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
        << "' viewBox='0 0 " << w << ' ' << h << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    for (std::size_t i = 0; i < ns.size(); ++i) {
        svg << "<text x='" << xpos(i) << "' y='" << h - mb + 20
            << "' text-anchor='middle' font-size='12'>" << ns[i] << "</text>\n";
    }
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        svg << "<text x='" << ml - 8 << "' y='" << ypos(v) + 4
            << "' text-anchor='end' font-size='11'>" << csv_double(std::round(v * 1000) / 1000)
            << "</text>\n";
        svg << "<line x1='" << ml - 4 << "' y1='" << ypos(v) << "' x2='" << ml << "' y2='"
            << ypos(v) << "' stroke='black'/>\n";
    }
    svg << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 12
        << "' text-anchor='middle' font-size='13'>per-centre n</text>\n";
    svg << "<text x='18' y='" << (mt + h - mb) / 2
        << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
        << (mt + h - mb) / 2 << ")'>" << (metric == "ari" ? "mean ARI" : "mean rounds")
        << "</text>\n";

    for (std::size_t s = 0; s < schemes.size(); ++s) {
        const std::string& colour = palette[s % palette.size()];
        std::ostringstream pts;
        for (std::size_t i = 0; i < ns.size(); ++i) {
            for (const auto& r : rows) {
                if (r.n != ns[i] || r.scheme != schemes[s]) continue;
                const auto [m, sd] = value_of(r);
                const double x = xpos(i), y = ypos(m);
                pts << x << ',' << y << ' ';
                svg << "<line x1='" << x << "' y1='" << ypos(m - sd) << "' x2='" << x << "' y2='"
                    << ypos(m + sd) << "' stroke='" << colour << "' stroke-width='1'/>\n";
                svg << "<circle cx='" << x << "' cy='" << y << "' r='3.5' fill='" << colour
                    << "'/>\n";
            }
        }
        svg << "<polyline points='" << pts.str() << "' fill='none' stroke='" << colour
            << "' stroke-width='1.5'/>\n";
        const double ly = mt + 16 + 18 * static_cast<double>(s);
        svg << "<rect x='" << w - mr + 12 << "' y='" << ly - 9 << "' width='12' height='12' fill='"
            << colour << "'/>\n";
        svg << "<text x='" << w - mr + 30 << "' y='" << ly + 2 << "' font-size='12'>" << schemes[s]
            << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path);
    require(out.good(), "cannot open '" + path + "' for writing");
    out << svg.str();
}

}  // namespace coc
