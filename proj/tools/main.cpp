// Command-line front end: homogeneity testing, block integration, clustering,
// power calculation, the simulation harness, and airline-data ingestion.

#include "coc/cluster.hpp"
#include "coc/experiments.hpp"
#include "coc/hypotests.hpp"
#include "coc/ingest.hpp"
#include "coc/io.hpp"
#include "coc/metrics.hpp"
#include "coc/models.hpp"
#include "coc/parallel.hpp"
#include "coc/resampling.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

using coc::Vector;

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<coc::CentreSummary> load_summaries(const std::string& path) {
    if (path == "-") return coc::read_summaries(std::cin);
    return coc::read_summaries_file(path);
}

void print_test_result(const coc::TestResult& r) {
    std::cout << "statistic: " << fmt_double(r.statistic) << "\n"
              << "p-value:   " << fmt_double(r.p_value) << "\n"
              << "alpha:     " << fmt_double(r.alpha) << "\n"
              << "decision:  " << (r.reject ? "reject homogeneity" : "do not reject") << "\n"
              << "mixture weights (" << r.weights.size() << "): ";
    for (Eigen::Index i = 0; i < r.weights.size(); ++i) {
        if (i) std::cout << ' ';
        std::cout << fmt_double(r.weights(i));
    }
    std::cout << "\n";
}

// Shared flags ------------------------------------------------------------

struct CommonOpts {
    double alpha = 0.05;
    std::uint64_t seed = 0;
    long draws = 100000;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--alpha", o.alpha, "Test level in (0,1)")
        ->capture_default_str()
        ->envname("COC_ALPHA");
    cmd->add_option("--seed", o.seed, "Root seed for every random stream")
        ->capture_default_str()
        ->envname("COC_SEED");
    cmd->add_option("--draws", o.draws, "Monte Carlo draws for mixture laws (>= 1000)")
        ->capture_default_str()
        ->envname("COC_DRAWS");
}

std::map<std::string, std::string> common_config(const std::string& subcommand,
                                                 const CommonOpts& o) {
    return {{"subcommand", subcommand},
            {"alpha", fmt_double(o.alpha)},
            {"seed", std::to_string(o.seed)},
            {"draws", std::to_string(o.draws)}};
}

// Model selection for raw-data inputs --------------------------------------

struct ModelOpts {
    std::string family = "logistic";
    double delta = coc::kDefaultHuberDelta;
    bool intercept = false;
};

void add_model(CLI::App* cmd, ModelOpts& m) {
    cmd->add_option("--family", m.family,
                    "Model for raw data: logistic, poisson, huber, pseudo_huber, log_cosh")
        ->capture_default_str()
        ->envname("COC_FAMILY");
    cmd->add_option("--delta", m.delta, "Robust loss scale (huber/pseudo_huber/log_cosh)")
        ->capture_default_str();
    cmd->add_flag("--intercept", m.intercept, "Prepend an intercept column to CSV features");
}

std::unique_ptr<coc::Fitter> make_fitter(const ModelOpts& m) {
    if (m.family == "logistic") return std::make_unique<coc::GlmFitter>(coc::Family::kLogistic);
    if (m.family == "poisson") return std::make_unique<coc::GlmFitter>(coc::Family::kPoisson);
    if (m.family == "huber")
        return std::make_unique<coc::RobustFitter>(coc::RobustLoss::kHuber, m.delta);
    if (m.family == "pseudo_huber")
        return std::make_unique<coc::RobustFitter>(coc::RobustLoss::kPseudoHuber, m.delta);
    if (m.family == "log_cosh")
        return std::make_unique<coc::RobustFitter>(coc::RobustLoss::kLogCosh, m.delta);
    throw coc::ValidationError("unknown family '" + m.family + "'");
}

std::vector<std::pair<std::string, coc::Dataset>> load_datasets(
    const std::vector<std::string>& specs, bool intercept) {
    coc::require(!specs.empty(), "at least one --data id=path is required");
    std::vector<std::pair<std::string, coc::Dataset>> out;
    for (const std::string& spec : specs) {
        const std::size_t eq = spec.find('=');
        coc::require(eq != std::string::npos && eq > 0 && eq + 1 < spec.size(),
                     "--data expects id=path, got '" + spec + "'");
        out.emplace_back(spec.substr(0, eq),
                         coc::read_dataset_csv(spec.substr(eq + 1), intercept));
    }
    return out;
}

// Subcommand runners --------------------------------------------------------

int run_test(const std::string& summaries_path, const CommonOpts& o, const std::string& out) {
    const auto summaries = load_summaries(summaries_path);
    const coc::TestResult r =
        coc::global_homogeneity_test(summaries, o.alpha, {o.draws, o.seed});
    std::cout << "global homogeneity test over " << summaries.size() << " centres\n";
    print_test_result(r);
    if (!out.empty()) {
        auto config = common_config("test", o);
        config["summaries"] = summaries_path;
        coc::write_text_file(out, coc::test_result_to_json(r, config));
        if (out != "-") std::cout << "wrote " << out << "\n";
    }
    return 0;
}

int run_integrate(const std::string& summaries_path, const std::string& block_a,
                  const std::string& block_b, const CommonOpts& o, const std::string& out) {
    const auto summaries = load_summaries(summaries_path);
    const coc::Block a = coc::make_block(split_commas(block_a));
    const coc::Block b = coc::make_block(split_commas(block_b));
    const coc::TestResult r = coc::integration_test(a, b, summaries, o.alpha, {o.draws, o.seed});
    std::cout << "integration test: {" << block_a << "} vs {" << block_b << "}\n";
    print_test_result(r);
    if (!out.empty()) {
        auto config = common_config("integrate", o);
        config["summaries"] = summaries_path;
        config["block_a"] = block_a;
        config["block_b"] = block_b;
        coc::write_text_file(out, coc::test_result_to_json(r, config));
        if (out != "-") std::cout << "wrote " << out << "\n";
    }
    return 0;
}

struct ClusterOpts {
    std::string roundset_path;
    std::string summaries_path;
    std::vector<std::string> data_specs;
    ModelOpts model;
    std::string scheme = "universal";
    int rounds = 40;
    std::string window = "heuristic";
    std::string mode = "cyclic";
    std::string out;
    std::string trace_out;
};

int run_cluster(const ClusterOpts& c, const CommonOpts& o) {
    coc::RoundSet rs;
    std::string input_desc;
    if (!c.roundset_path.empty()) {
        coc::require(c.summaries_path.empty() && c.data_specs.empty(),
                     "--roundset cannot be combined with --summaries or --data");
        rs = coc::read_roundset_file(c.roundset_path);
        input_desc = "round set " + c.roundset_path;
    } else if (!c.summaries_path.empty()) {
        coc::require(c.data_specs.empty(), "--summaries cannot be combined with --data");
        const auto summaries = load_summaries(c.summaries_path);
        if (c.rounds == 0) {
            rs.base = summaries;  // one-shot needs no replicate bank
        } else {
            rs = coc::make_roundset(summaries,
                                    {coc::parse_scheme(c.scheme), c.rounds, o.seed});
        }
        input_desc = "summaries " + c.summaries_path;
    } else {
        const auto centres = load_datasets(c.data_specs, c.model.intercept);
        const auto fitter = make_fitter(c.model);
        if (c.rounds == 0) {
            for (const auto& [id, d] : centres) rs.base.push_back(fitter->fit(d, id).summary);
        } else {
            rs = coc::make_roundset(centres, *fitter,
                                    {coc::parse_scheme(c.scheme), c.rounds, o.seed});
        }
        input_desc = std::to_string(centres.size()) + " raw datasets";
    }

    const int k = static_cast<int>(rs.base.size());
    const coc::WindowRule rule = coc::parse_window_rule(c.window);
    const coc::MonteCarloConfig mc{o.draws, o.seed};

    coc::CocTrace trace;
    if (c.mode == "oneshot" || c.rounds == 0) {
        trace.partition = coc::one_shot_coc(rs.base, o.alpha, mc);
        trace.sizes = {static_cast<int>(trace.partition.blocks.size())};
        trace.replicate_index = {0};
        trace.runlen = {1};
        trace.rounds_used = 1;
        trace.stop_reason = "one_shot";
    } else if (c.mode == "rounds") {
        trace = coc::multi_round_coc(rs, o.alpha, mc);
    } else if (c.mode == "cyclic") {
        trace = coc::cyclic_coc(rs, o.alpha, coc::resolve_window(rule, k), mc);
    } else {
        throw coc::ValidationError("unknown --mode '" + c.mode + "' (oneshot, rounds, cyclic)");
    }

    std::cout << "clustered " << k << " centres from " << input_desc << "\n"
              << "blocks (" << trace.partition.blocks.size() << "):\n";
    for (const coc::Block& b : trace.partition.blocks) {
        std::cout << "  {";
        for (std::size_t i = 0; i < b.members.size(); ++i)
            std::cout << (i ? ", " : "") << b.members[i];
        std::cout << "}\n";
    }
    std::cout << "rounds used: " << trace.rounds_used << " (" << trace.stop_reason << ")\n";

    auto config = common_config("cluster", o);
    config["mode"] = c.mode;
    config["scheme"] = c.scheme;
    config["rounds"] = std::to_string(c.rounds);
    config["window"] = coc::window_rule_name(rule);
    if (!c.out.empty()) {
        coc::write_text_file(c.out, coc::partition_to_json(trace, o.alpha, o.seed, config));
        if (c.out != "-") std::cout << "wrote " << c.out << "\n";
    }
    if (!c.trace_out.empty()) {
        coc::write_text_file(c.trace_out, coc::trace_to_csv(trace));
        if (c.trace_out != "-") std::cout << "wrote " << c.trace_out << "\n";
    }
    return 0;
}

int run_power(const std::string& summaries_path, const std::string& deltas_path,
              const CommonOpts& o, const std::string& out) {
    const auto summaries = load_summaries(summaries_path);
    const auto delta_map = coc::read_deltas_file(deltas_path);
    std::vector<Vector> deltas;
    for (const coc::CentreSummary& s : summaries) {
        const auto it = delta_map.find(s.centre_id);
        coc::require(it != delta_map.end(),
                     "deltas file is missing centre '" + s.centre_id + "'");
        deltas.push_back(it->second);
    }
    coc::require(delta_map.size() == summaries.size(), "deltas file names unknown centres");
    const double power = coc::local_power(summaries, deltas, o.alpha, {o.draws, o.seed});
    std::cout << "asymptotic local power at alpha " << fmt_double(o.alpha) << ": "
              << fmt_double(power) << "\n";
    if (!out.empty()) {
        auto config = common_config("power", o);
        config["summaries"] = summaries_path;
        config["deltas"] = deltas_path;
        std::ostringstream js;
        js << "{\n  \"power\": " << fmt_double(power) << ",\n  \"alpha\": "
           << fmt_double(o.alpha) << ",\n  \"config\": {";
        bool first = true;
        for (const auto& [key, value] : config) {
            js << (first ? "\n" : ",\n") << "    \"" << key << "\": \"" << value << "\"";
            first = false;
        }
        js << "\n  }\n}\n";
        coc::write_text_file(out, js.str());
        if (out != "-") std::cout << "wrote " << out << "\n";
    }
    return 0;
}

struct SimulateOpts {
    std::string profile = "desk";
    std::string sizes = "5,4,9";
    std::string n_grid;
    std::string schemes;
    int reps = -1;
    int rounds = -1;
    std::string window = "heuristic";
    std::string out_dir = "sim_out";
    int jobs = 0;
};

int run_simulate(const SimulateOpts& s, const CommonOpts& o) {
    coc::ExperimentConfig cfg;
    cfg.alpha = o.alpha;
    cfg.draws = o.draws;
    cfg.seed = o.seed;
    cfg.jobs = s.jobs > 0 ? s.jobs : coc::default_jobs();

    if (s.profile == "desk") {
        cfg.mc_reps = 200;
    } else if (s.profile == "smoke") {
        cfg.sim.cluster_sizes = {2, 2};
        cfg.n_grid = {400};
        cfg.schemes = {coc::Scheme::kUniversal};
        cfg.mc_reps = 2;
        cfg.rounds = 10;
        cfg.draws = std::min<long>(cfg.draws, 20000);
    } else {
        throw coc::ValidationError("unknown --profile '" + s.profile + "' (desk, smoke)");
    }

    if (s.sizes != "5,4,9" || s.profile == "desk") {
        cfg.sim.cluster_sizes.clear();
        for (const std::string& part : split_commas(s.sizes))
            cfg.sim.cluster_sizes.push_back(std::stoi(part));
    }
    if (!s.n_grid.empty()) {
        cfg.n_grid.clear();
        for (const std::string& part : split_commas(s.n_grid))
            cfg.n_grid.push_back(std::stol(part));
    }
    if (!s.schemes.empty()) {
        cfg.schemes.clear();
        for (const std::string& part : split_commas(s.schemes))
            cfg.schemes.push_back(coc::parse_scheme(part));
    }
    if (s.reps > 0) cfg.mc_reps = s.reps;
    if (s.rounds > 0) cfg.rounds = s.rounds;
    cfg.window = coc::parse_window_rule(s.window);

    std::filesystem::create_directories(s.out_dir);
    const auto records = coc::run_mc(cfg);
    const auto rows = coc::summarize_mc(records);

    const std::string metrics_path = s.out_dir + "/metrics.csv";
    const std::string summary_path = s.out_dir + "/summary.csv";
    coc::write_metrics_csv(records, metrics_path);
    coc::write_summary_csv(rows, summary_path);
    coc::write_fig_svg(rows, "ari", s.out_dir + "/fig_ari.svg");
    coc::write_fig_svg(rows, "rounds", s.out_dir + "/fig_rounds.svg");

    auto config = common_config("simulate", o);
    config["profile"] = s.profile;
    config["sizes"] = s.sizes;
    config["reps"] = std::to_string(cfg.mc_reps);
    config["rounds"] = std::to_string(cfg.rounds);
    config["window"] = coc::window_rule_name(cfg.window);
    config["jobs"] = std::to_string(cfg.jobs);
    {
        std::ostringstream ng;
        for (std::size_t i = 0; i < cfg.n_grid.size(); ++i)
            ng << (i ? "," : "") << cfg.n_grid[i];
        config["n_grid"] = ng.str();
        std::ostringstream sc;
        for (std::size_t i = 0; i < cfg.schemes.size(); ++i)
            sc << (i ? "," : "") << coc::scheme_name(cfg.schemes[i]);
        config["schemes"] = sc.str();
        config["draws"] = std::to_string(cfg.draws);
    }
    std::ostringstream cj;
    cj << "{";
    bool first = true;
    for (const auto& [key, value] : config) {
        cj << (first ? "\n" : ",\n") << "  \"" << key << "\": \"" << value << "\"";
        first = false;
    }
    cj << "\n}\n";
    coc::write_text_file(s.out_dir + "/run_config.json", cj.str());

    long failures = 0;
    for (const auto& r : records) failures += r.failed ? 1 : 0;
    std::cout << "simulation complete: " << records.size() << " replications, " << failures
              << " failed\n";
    for (const auto& row : rows)
        std::cout << "  n=" << row.n << " scheme=" << row.scheme << "  ARI " << fmt_double(row.ari_mean)
                  << " +/- " << fmt_double(row.ari_sd) << "  rounds " << fmt_double(row.rounds_mean)
                  << " +/- " << fmt_double(row.rounds_sd) << "\n";
    std::cout << "wrote " << metrics_path << ", " << summary_path << ", fig_ari.svg, fig_rounds.svg\n";
    return 0;
}

struct IngestOpts {
    std::string flights;
    long min_flights = 100000;
    long sample = 100000;
    std::string out;
};

int run_ingest(const IngestOpts& g, const CommonOpts& o) {
    coc::IngestReport report;
    const auto rows = coc::read_flights_csv(g.flights, report);
    const auto usable = coc::filter_usable(rows, report);
    std::cout << "rows " << report.total_rows << ": malformed " << report.malformed
              << ", cancelled " << report.cancelled << ", missing delay " << report.missing_delay
              << ", usable " << report.usable << "\n";
    const auto designs = coc::select_and_sample(usable, g.min_flights, g.sample, o.seed);
    coc::require(!designs.empty(),
                 "no destination reaches " + std::to_string(g.min_flights) + " usable flights");
    std::cout << designs.size() << " destination centres with >= " << g.min_flights
              << " usable flights; " << g.sample << " rows sampled from each\n";

    std::vector<coc::CentreSummary> summaries;
    for (const auto& [dest, design] : designs) {
        coc::Dataset with_intercept;
        with_intercept.X.resize(design.X.rows(), design.X.cols() + 1);
        with_intercept.X.col(0).setOnes();
        with_intercept.X.rightCols(design.X.cols()) = design.X;
        with_intercept.y = design.y;
        const coc::FitResult fit = coc::fit_glm(with_intercept, coc::Family::kLogistic, dest);
        summaries.push_back(fit.summary);
        std::cout << "  " << dest << ": late-arrival rate " << fmt_double(design.y.mean())
                  << (fit.diagnostics.converged ? "" : "  [fit did not converge]") << "\n";
    }
    if (!g.out.empty()) {
        coc::write_text_file(g.out, coc::summaries_to_json(summaries));
        if (g.out != "-") std::cout << "wrote " << g.out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated homogeneity testing and clustering over centre summaries"};
    app.require_subcommand(1);

    CommonOpts common;

    // test ---------------------------------------------------------------
    auto* test_cmd = app.add_subcommand("test", "Global homogeneity test on centre summaries");
    std::string test_summaries;
    std::string test_out;
    test_cmd->add_option("--summaries", test_summaries, "Summaries JSON file ('-' for stdin)")
        ->required();
    test_cmd->add_option("--out", test_out, "Write TestResult JSON here ('-' for stdout)");
    add_common(test_cmd, common);

    // integrate ------------------------------------------------------------
    auto* integrate_cmd =
        app.add_subcommand("integrate", "Two-block integration test on centre summaries");
    std::string int_summaries, int_a, int_b, int_out;
    integrate_cmd->add_option("--summaries", int_summaries, "Summaries JSON file ('-' for stdin)")
        ->required();
    integrate_cmd->add_option("--block-a", int_a, "Comma-separated centre ids")->required();
    integrate_cmd->add_option("--block-b", int_b, "Comma-separated centre ids")->required();
    integrate_cmd->add_option("--out", int_out, "Write TestResult JSON here");
    add_common(integrate_cmd, common);

    // cluster --------------------------------------------------------------
    auto* cluster_cmd = app.add_subcommand(
        "cluster", "Partition centres into homogeneous blocks (emits partition + trace)");
    ClusterOpts cl;
    cluster_cmd->add_option("--roundset", cl.roundset_path, "Precomputed round-set JSON");
    cluster_cmd->add_option("--summaries", cl.summaries_path,
                            "Summaries JSON ('-' for stdin); rounds generated by --scheme");
    cluster_cmd->add_option("--data", cl.data_specs,
                            "Raw dataset as id=path.csv (repeatable); fitted by --family");
    add_model(cluster_cmd, cl.model);
    cluster_cmd->add_option("--scheme", cl.scheme,
                            "Resampling scheme: nonparametric, weighted, universal")
        ->capture_default_str()
        ->envname("COC_SCHEME");
    cluster_cmd->add_option("--rounds", cl.rounds, "Replicate rounds R (0 = one-shot)")
        ->capture_default_str()
        ->envname("COC_ROUNDS");
    cluster_cmd->add_option("--window", cl.window, "Plateau window: heuristic, exact, or an integer")
        ->capture_default_str()
        ->envname("COC_WINDOW");
    cluster_cmd->add_option("--mode", cl.mode, "Algorithm: oneshot, rounds, cyclic")
        ->capture_default_str();
    cluster_cmd->add_option("--out", cl.out, "Write partition JSON here ('-' for stdout)");
    cluster_cmd->add_option("--trace", cl.trace_out, "Write per-round trace CSV here");
    add_common(cluster_cmd, common);

    // power ----------------------------------------------------------------
    auto* power_cmd =
        app.add_subcommand("power", "Asymptotic power under local drift deltas/sqrt(n)");
    std::string pw_summaries, pw_deltas, pw_out;
    power_cmd->add_option("--summaries", pw_summaries, "Summaries JSON file ('-' for stdin)")
        ->required();
    power_cmd->add_option("--deltas", pw_deltas, "JSON object: centre id -> drift vector")
        ->required();
    power_cmd->add_option("--out", pw_out, "Write power JSON here");
    add_common(power_cmd, common);

    // simulate ---------------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "Replicated clustering study over a seed grid");
    SimulateOpts sim;
    sim_cmd->add_option("--profile", sim.profile, "desk (200 reps/cell) or smoke (tiny)")
        ->capture_default_str();
    sim_cmd->add_option("--sizes", sim.sizes, "Cluster sizes, comma-separated")
        ->capture_default_str();
    sim_cmd->add_option("--n-grid", sim.n_grid, "Per-centre sample sizes, comma-separated");
    sim_cmd->add_option("--schemes", sim.schemes, "Schemes to compare, comma-separated");
    sim_cmd->add_option("--reps", sim.reps, "Replications per cell");
    sim_cmd->add_option("--rounds", sim.rounds, "Replicate rounds R per round set");
    sim_cmd->add_option("--window", sim.window, "Plateau window: heuristic, exact, or an integer")
        ->capture_default_str()
        ->envname("COC_WINDOW");
    sim_cmd->add_option("--out-dir", sim.out_dir, "Output directory for CSV/SVG artifacts")
        ->capture_default_str();
    sim_cmd->add_option("--jobs", sim.jobs, "Worker threads (default: available parallelism)")
        ->envname("COC_JOBS");
    add_common(sim_cmd, common);

    // ingest ------------------------------------------------------------------
    auto* ingest_cmd =
        app.add_subcommand("ingest", "Airline on-time CSV -> per-destination summaries JSON");
    IngestOpts ing;
    ingest_cmd->add_option("--flights", ing.flights, "On-time performance CSV")->required();
    ingest_cmd->add_option("--min-flights", ing.min_flights, "Usable-flight threshold per destination")
        ->capture_default_str();
    ingest_cmd->add_option("--sample", ing.sample, "Rows sampled per qualifying destination")
        ->capture_default_str();
    ingest_cmd->add_option("--out", ing.out, "Write summaries JSON here ('-' for stdout)");
    add_common(ingest_cmd, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 64;
    }

    try {
        if (test_cmd->parsed()) return run_test(test_summaries, common, test_out);
        if (integrate_cmd->parsed())
            return run_integrate(int_summaries, int_a, int_b, common, int_out);
        if (cluster_cmd->parsed()) return run_cluster(cl, common);
        if (power_cmd->parsed()) return run_power(pw_summaries, pw_deltas, common, pw_out);
        if (sim_cmd->parsed()) return run_simulate(sim, common);
        if (ingest_cmd->parsed()) return run_ingest(ing, common);
    } catch (const coc::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const coc::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
