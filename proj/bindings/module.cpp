// Python surface: summary exchange, aggregation, homogeneity tests, power,
// clustering, and the per-centre model fits.

#include "coc/cluster.hpp"
#include "coc/hypotests.hpp"
#include "coc/models.hpp"
#include "coc/resampling.hpp"
#include "coc/summaries.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace coc;

namespace {

std::vector<CentreSummary> validated(std::vector<CentreSummary> summaries) {
    for (auto& s : summaries) s = validate_summary(s);
    return summaries;
}

py::dict test_result_dict(const TestResult& r) {
    py::dict d;
    d["statistic"] = r.statistic;
    d["p_value"] = r.p_value;
    d["alpha"] = r.alpha;
    d["reject"] = r.reject;
    d["weights"] = r.weights;
    return d;
}

std::vector<std::vector<std::string>> blocks_of(const Partition& part) {
    std::vector<std::vector<std::string>> out;
    for (const Block& b : part.blocks) out.push_back(b.members);
    return out;
}

}  // namespace

PYBIND11_MODULE(coc_infer, m) {
    m.doc() = "Federated inference from centre summaries: aggregation, homogeneity "
              "tests, local power, and clustering of centres into homogeneous blocks.";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<CentreSummary>(m, "Summary",
                              "One centre's shareable state: estimate theta plus the "
                              "per-observation V (sensitivity) and Q (variability) matrices.")
        .def(py::init([](std::string centre_id, long n, Vector theta, Matrix V, Matrix Q) {
                 CentreSummary s;
                 s.centre_id = std::move(centre_id);
                 s.n = n;
                 s.theta = std::move(theta);
                 s.V = std::move(V);
                 s.Q = std::move(Q);
                 return validate_summary(s);
             }),
             py::arg("centre_id"), py::arg("n"), py::arg("theta"), py::arg("V"), py::arg("Q"))
        .def_readonly("centre_id", &CentreSummary::centre_id)
        .def_readonly("n", &CentreSummary::n)
        .def_readonly("theta", &CentreSummary::theta)
        .def_readonly("V", &CentreSummary::V)
        .def_readonly("Q", &CentreSummary::Q)
        .def_property_readonly("p", &CentreSummary::p)
        .def("__repr__", [](const CentreSummary& s) {
            return "Summary(centre_id='" + s.centre_id + "', n=" + std::to_string(s.n) +
                   ", p=" + std::to_string(s.p()) + ")";
        });

    m.def(
        "aggregate",
        [](std::vector<CentreSummary> summaries) {
            const AggregatedEstimate agg = aee_aggregate(validated(std::move(summaries)));
            py::dict d;
            d["theta"] = agg.theta;
            d["V_sum"] = agg.V_sum;
            d["Q_sum"] = agg.Q_sum;
            d["W"] = agg.W;
            return d;
        },
        py::arg("summaries"),
        "Sensitivity-weighted aggregation: theta = (sum V_k)^{-1} sum V_k theta_k, "
        "with the sandwich covariance W of the aggregate.");

    m.def(
        "global_test",
        [](std::vector<CentreSummary> summaries, double alpha, long draws, std::uint64_t seed) {
            return test_result_dict(global_homogeneity_test(validated(std::move(summaries)),
                                                            alpha, {draws, seed}));
        },
        py::arg("summaries"), py::arg("alpha") = 0.05, py::arg("draws") = 100000,
        py::arg("seed") = 0,
        "Tests whether all centres share one parameter; the null law is a weighted "
        "chi-square mixture evaluated by seeded Monte Carlo.");

    m.def(
        "integration_test",
        [](std::vector<std::string> block_a, std::vector<std::string> block_b,
           std::vector<CentreSummary> summaries, double alpha, long draws, std::uint64_t seed) {
            return test_result_dict(integration_test(make_block(std::move(block_a)),
                                                     make_block(std::move(block_b)),
                                                     validated(std::move(summaries)), alpha,
                                                     {draws, seed}));
        },
        py::arg("block_a"), py::arg("block_b"), py::arg("summaries"), py::arg("alpha") = 0.05,
        py::arg("draws") = 100000, py::arg("seed") = 0,
        "Tests whether two disjoint blocks of centres share one parameter.");

    m.def(
        "local_power",
        [](std::vector<CentreSummary> summaries, std::vector<Vector> deltas, double alpha,
           long draws, std::uint64_t seed) {
            return local_power(validated(std::move(summaries)), deltas, alpha, {draws, seed});
        },
        py::arg("summaries"), py::arg("deltas"), py::arg("alpha") = 0.05,
        py::arg("draws") = 100000, py::arg("seed") = 0,
        "Asymptotic power of the global test when centre k drifts by deltas[k]/sqrt(n).");

    m.def(
        "one_shot",
        [](std::vector<CentreSummary> summaries, double alpha, long draws, std::uint64_t seed) {
            return blocks_of(one_shot_coc(validated(std::move(summaries)), alpha, {draws, seed}));
        },
        py::arg("summaries"), py::arg("alpha") = 0.05, py::arg("draws") = 100000,
        py::arg("seed") = 0,
        "Single-pass partition of centres into homogeneous blocks.");

    m.def(
        "cluster",
        [](std::vector<CentreSummary> summaries, double alpha, int rounds,
           const std::string& window, long draws, std::uint64_t seed) {
            const auto checked = validated(std::move(summaries));
            RoundSet rs = make_roundset(checked, {Scheme::kUniversal, rounds, seed});
            const long win = resolve_window(parse_window_rule(window),
                                            static_cast<int>(checked.size()));
            const CocTrace trace = cyclic_coc(rs, alpha, win, {draws, seed});
            py::dict d;
            d["blocks"] = blocks_of(trace.partition);
            d["rounds_used"] = trace.rounds_used;
            d["stop_reason"] = trace.stop_reason;
            return d;
        },
        py::arg("summaries"), py::arg("alpha") = 0.05, py::arg("rounds") = 40,
        py::arg("window") = "heuristic", py::arg("draws") = 100000, py::arg("seed") = 0,
        "Iterative clustering of centres: replays a bank of Gaussian re-estimates "
        "(the summaries-only scheme) until the block count plateaus.");

    m.def(
        "fit_glm",
        [](const Matrix& X, const Vector& y, const std::string& family,
           const std::string& centre_id) {
            Dataset d{X, y};
            Family fam;
            if (family == "logistic") {
                fam = Family::kLogistic;
            } else if (family == "poisson") {
                fam = Family::kPoisson;
            } else {
                throw ValidationError("family must be 'logistic' or 'poisson'");
            }
            const FitResult fit = fit_glm(d, fam, centre_id);
            return py::make_tuple(fit.summary, fit.diagnostics.warnings);
        },
        py::arg("X"), py::arg("y"), py::arg("family") = "logistic",
        py::arg("centre_id") = "centre",
        "Canonical-link GLM fit; returns (Summary, warnings). The design matrix is "
        "used as given - include an intercept column if one is wanted.");

    m.def(
        "fit_robust",
        [](const Matrix& X, const Vector& y, const std::string& loss, double delta,
           const std::string& centre_id) {
            Dataset d{X, y};
            RobustLoss rl;
            if (loss == "huber") {
                rl = RobustLoss::kHuber;
            } else if (loss == "pseudo_huber") {
                rl = RobustLoss::kPseudoHuber;
            } else if (loss == "log_cosh") {
                rl = RobustLoss::kLogCosh;
            } else {
                throw ValidationError("loss must be 'huber', 'pseudo_huber', or 'log_cosh'");
            }
            const FitResult fit = fit_robust(d, rl, delta, centre_id);
            return py::make_tuple(fit.summary, fit.diagnostics.warnings);
        },
        py::arg("X"), py::arg("y"), py::arg("loss") = "huber",
        py::arg("delta") = kDefaultHuberDelta, py::arg("centre_id") = "centre",
        "Robust linear regression by IRLS; returns (Summary, warnings).");

    m.def("n_max", &n_max, py::arg("k"),
          "Worst-case distinct merge decisions for k centres: k(k-1)/2 * 3^(k-2).");
    m.def("stop_window", &stop_window, py::arg("k"),
          "Heuristic plateau window: ceil(ln k * ln n_max(k)).");
}
