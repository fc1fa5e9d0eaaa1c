// Python module exposing the core operations: measures on a grid, transport
// maps and distances, the regression fit, synthetic data generation and the
// diagnostic studies. File I/O and plotting stay in the command line tool.

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "dodreg/diagnostics.hpp"
#include "dodreg/estimator.hpp"
#include "dodreg/grid.hpp"
#include "dodreg/io.hpp"
#include "dodreg/measure.hpp"
#include "dodreg/rng.hpp"
#include "dodreg/simulation.hpp"
#include "dodreg/transport.hpp"

namespace py = pybind11;
using namespace dodreg;

namespace {

// Bound classes hold Grid by value; library types share it through a
// GridPtr. Grids compare by value, so rebuilding the shared handle at the
// boundary is exact and keeps the bindings free of smart-pointer holders.
GridPtr shared(const Grid& g) {
    return make_grid(g.omega_min(), g.omega_max(), g.size());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "Distribution-on-distribution regression: probability measures on a "
        "discretized interval, monotone transport maps between them, and a "
        "least-squares regression map fitted by weighted isotonic regression.";
    m.attr("__version__") = kToolVersion;

    py::class_<Grid>(m, "Grid",
                     "Equal-width discretization of [omega_min, omega_max] into m "
                     "cells; nodes are cell midpoints, levels are (k + 1/2)/m.")
        .def(py::init<double, double, std::size_t>(), py::arg("omega_min"),
             py::arg("omega_max"), py::arg("m"))
        .def_property_readonly("omega_min", &Grid::omega_min)
        .def_property_readonly("omega_max", &Grid::omega_max)
        .def_property_readonly("m", &Grid::size)
        .def_property_readonly("cell_width", &Grid::cell_width)
        .def("node", &Grid::node, py::arg("j"))
        .def("level", &Grid::level, py::arg("k"))
        .def("edge", &Grid::edge, py::arg("j"))
        .def("nodes", &Grid::nodes)
        .def("levels", &Grid::levels)
        .def("contains", &Grid::contains, py::arg("x"))
        .def("__len__", &Grid::size)
        .def(py::self == py::self)
        .def(py::self != py::self)
        .def("__repr__", [](const Grid& g) {
            return "Grid(" + std::to_string(g.omega_min()) + ", " +
                   std::to_string(g.omega_max()) + ", m=" + std::to_string(g.size()) + ")";
        });

    py::class_<Measure>(m, "Measure",
                        "Probability measure stored as its quantile values at the "
                        "grid levels; quantile and CDF views are derived from them.")
        .def(py::init([](const Grid& g, std::vector<double> q) {
                 return Measure(shared(g), std::move(q));
             }),
             py::arg("grid"), py::arg("quantiles"))
        .def_property_readonly("grid", [](const Measure& mu) { return mu.grid(); })
        .def_property_readonly("quantiles",
                               [](const Measure& mu) { return mu.quantiles(); })
        .def("quantile", &Measure::quantile, py::arg("p"))
        .def("cdf", &Measure::cdf, py::arg("x"))
        .def_property_readonly("is_point_mass", &Measure::is_point_mass)
        .def_property_readonly("is_absolutely_continuous",
                               &Measure::is_absolutely_continuous)
        .def("__repr__", [](const Measure& mu) {
            return "Measure(m=" + std::to_string(mu.grid().size()) + ", support=[" +
                   std::to_string(mu.quantiles().front()) + ", " +
                   std::to_string(mu.quantiles().back()) + "])";
        });

    py::class_<SampleSet>(m, "SampleSet",
                          "Raw observations together with the interval that "
                          "contains them.")
        .def(py::init<std::vector<double>, double, double>(), py::arg("values"),
             py::arg("omega_min"), py::arg("omega_max"))
        .def_property_readonly("values", [](const SampleSet& s) { return s.values(); })
        .def_property_readonly("omega_min", &SampleSet::omega_min)
        .def_property_readonly("omega_max", &SampleSet::omega_max)
        .def("__len__", &SampleSet::size);

    py::class_<WeightedSamples>(m, "WeightedSamples",
                                "Point set with positive multiplicities, equivalent "
                                "to repeating each value weight-many times.")
        .def(py::init([](std::vector<double> values, std::vector<double> weights) {
                 return WeightedSamples{std::move(values), std::move(weights)};
             }),
             py::arg("values"), py::arg("weights"))
        .def_readwrite("values", &WeightedSamples::values)
        .def_readwrite("weights", &WeightedSamples::weights);

    py::class_<MonotoneMap>(m, "MonotoneMap",
                            "Nondecreasing map stored by its node values and "
                            "evaluated by piecewise-linear interpolation.")
        .def(py::init([](const Grid& g, std::vector<double> v) {
                 return MonotoneMap(shared(g), std::move(v));
             }),
             py::arg("grid"), py::arg("values"))
        .def(py::init([](const Grid& g, std::vector<double> v, std::vector<bool> mask) {
                 return MonotoneMap(shared(g), std::move(v), std::move(mask));
             }),
             py::arg("grid"), py::arg("values"), py::arg("defined_mask"))
        .def_property_readonly("grid", [](const MonotoneMap& t) { return t.grid(); })
        .def_property_readonly("values", [](const MonotoneMap& t) { return t.values(); })
        .def_property_readonly("defined_mask",
                               [](const MonotoneMap& t) { return t.defined_mask(); })
        .def("__call__", &MonotoneMap::operator(), py::arg("x"));

    py::class_<NodeWeights>(m, "NodeWeights",
                            "Nonnegative node weights used as the integration "
                            "measure in map distances.")
        .def(py::init([](const Grid& g, std::vector<double> w) {
                 return NodeWeights(shared(g), std::move(w));
             }),
             py::arg("grid"), py::arg("weights"))
        .def_property_readonly("grid", [](const NodeWeights& w) { return w.grid(); })
        .def_property_readonly("weights",
                               [](const NodeWeights& w) { return w.weights(); });

    // --- measure construction and distances -----------------------------

    m.def("measure_from_samples",
          [](const SampleSet& s, const Grid& g) {
              return measure_from_samples(s, shared(g));
          },
          py::arg("samples"), py::arg("grid"),
          "Empirical measure of a sample set on the given grid.");
    m.def("silverman_bandwidth",
          py::overload_cast<const SampleSet&>(&silverman_bandwidth), py::arg("samples"),
          "Rule-of-thumb kernel bandwidth 0.9 * min(sd, IQR/1.34) * n^(-1/5).");
    m.def("silverman_bandwidth",
          py::overload_cast<const WeightedSamples&>(&silverman_bandwidth),
          py::arg("samples"));
    m.def("kde_to_measure",
          [](const SampleSet& s, double bandwidth, const Grid& g) {
              return kde_to_measure(s, bandwidth, shared(g));
          },
          py::arg("samples"), py::arg("bandwidth"), py::arg("grid"),
          "Gaussian kernel density estimate with boundary reflection, as a measure.");
    m.def("kde_to_measure",
          [](const WeightedSamples& s, double bandwidth, const Grid& g) {
              return kde_to_measure(s, bandwidth, shared(g));
          },
          py::arg("samples"), py::arg("bandwidth"), py::arg("grid"));
    m.def("density_to_measure",
          [](const Grid& g, std::vector<double> values) {
              return density_to_measure(DensityCurve(shared(g), std::move(values)));
          },
          py::arg("grid"), py::arg("values"),
          "Measure whose density takes the given nonnegative node values.");
    m.def("measure_to_density",
          [](const Measure& mu) { return measure_to_density(mu).values(); },
          py::arg("mu"), "Density values of a measure at the grid nodes.");
    m.def("cell_masses", &cell_masses, py::arg("mu"),
          "Mass the measure assigns to each grid cell; sums to one.");
    m.def("wasserstein_distance", &wasserstein_distance, py::arg("mu"), py::arg("nu"),
          "Transport distance: root mean square difference of the quantile vectors.");

    // --- transport maps --------------------------------------------------

    m.def("optimal_map", &optimal_map, py::arg("mu"), py::arg("nu"),
          "Monotone transport map from mu to nu (nu's quantile function composed "
          "with mu's CDF, sampled at the nodes).");
    m.def("pushforward", &pushforward, py::arg("t"), py::arg("mu"),
          "Law of t(X) for X distributed as mu.");
    m.def("compose", &compose, py::arg("outer"), py::arg("inner"));
    m.def("identity_map", [](const Grid& g) { return identity_map(shared(g)); },
          py::arg("grid"));
    m.def("fill_undefined_nodes",
          [](const Grid& g, const std::vector<double>& values,
             const std::vector<bool>& defined) {
              return fill_undefined_nodes(shared(g), values, defined);
          },
          py::arg("grid"), py::arg("values"), py::arg("defined"),
          "Completes a partially defined map by monotone interpolation.");
    m.def("map_l2_distance", &map_l2_distance, py::arg("a"), py::arg("b"),
          py::arg("weights"), "Weighted L2 distance between two maps' node values.");
    m.def("node_weights_of", &node_weights_of, py::arg("mu"),
          "Cell masses of a measure packaged as integration weights.");

    // --- regression ------------------------------------------------------

    py::class_<RegressionPair>(m, "RegressionPair",
                               "One predictor/response observation on a shared grid.")
        .def(py::init([](Measure predictor, Measure response) {
                 return RegressionPair{std::move(predictor), std::move(response), {}, {}};
             }),
             py::arg("predictor"), py::arg("response"))
        .def_readonly("predictor", &RegressionPair::predictor)
        .def_readonly("response", &RegressionPair::response)
        .def_readonly("predictor_samples", &RegressionPair::predictor_samples)
        .def_readonly("response_samples", &RegressionPair::response_samples);

    py::class_<RegressionDataset>(m, "RegressionDataset",
                                  "A nonempty list of regression pairs on one grid.")
        .def(py::init<std::vector<RegressionPair>>(), py::arg("pairs"))
        .def_property_readonly("pairs",
                               [](const RegressionDataset& d) { return d.pairs(); })
        .def_property_readonly("grid",
                               [](const RegressionDataset& d) { return d.grid(); })
        .def("__len__", &RegressionDataset::size);

    py::class_<IsotonicProblem>(m, "IsotonicProblem",
                                "Node-pooled weighted isotonic regression problem.")
        .def_readonly("pooled_targets", &IsotonicProblem::pooled_targets)
        .def_readonly("pooled_weights", &IsotonicProblem::pooled_weights)
        .def_readonly("coverage_mask", &IsotonicProblem::coverage_mask);

    py::class_<FitResult>(m, "FitResult",
                          "Fitted regression map with its objective value and "
                          "per-pair fit quality.")
        .def_readonly("map", &FitResult::map)
        .def_readonly("objective", &FitResult::objective)
        .def_readonly("per_pair_wd", &FitResult::per_pair_wd)
        .def_readonly("coverage_mask", &FitResult::coverage_mask)
        .def_readonly("qn_weights", &FitResult::qn_weights);

    m.def("build_isotonic_problem", &build_isotonic_problem, py::arg("dataset"));
    m.def("pava",
          [](const std::vector<double>& targets, const std::vector<double>& weights) {
              return pava(targets, weights);
          },
          py::arg("targets"), py::arg("weights"),
          "Weighted least-squares fit of a nondecreasing sequence "
          "(pool-adjacent-violators).");
    m.def("fit", &fit, py::arg("dataset"),
          "Least-squares regression map for a dataset of measure pairs.");
    m.def("predict", &predict, py::arg("fit"), py::arg("mu"),
          "Fitted response for a predictor measure.");
    m.def("objective", &objective, py::arg("t"), py::arg("dataset"),
          "Mean squared transport distance between pushed predictors and "
          "responses, halved.");

    // --- synthetic data --------------------------------------------------

    py::class_<RngStream>(m, "RngStream",
                          "Counter-seeded random stream; (seed, stream_id) pairs give "
                          "independent reproducible sequences.")
        .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"),
             py::arg("stream_id") = 0)
        .def("next_u64", &RngStream::next_u64)
        .def("uniform", py::overload_cast<>(&RngStream::uniform))
        .def("uniform", py::overload_cast<double, double>(&RngStream::uniform),
             py::arg("lo"), py::arg("hi"))
        .def("uniform_int", &RngStream::uniform_int, py::arg("lo"), py::arg("hi"))
        .def("derive_seed", &RngStream::derive_seed);

    m.def("zeta", &zeta, py::arg("k"), py::arg("x"),
          "Smooth monotone deformation x - sin(pi k x) / (|k| pi) on [-1, 1].");
    m.def("zeta_map", [](int k, const Grid& g) { return zeta_map(k, shared(g)); },
          py::arg("k"), py::arg("grid"));

    py::class_<BetaMixtureSpec>(m, "BetaMixtureSpec",
                                "Three-component Beta mixture with random shape "
                                "parameters.")
        .def(py::init<>())
        .def_readwrite("weights", &BetaMixtureSpec::weights)
        .def_readwrite("parameter_min", &BetaMixtureSpec::parameter_min)
        .def_readwrite("parameter_max", &BetaMixtureSpec::parameter_max)
        .def("validate", &BetaMixtureSpec::validate);

    py::class_<NoiseSpec>(m, "NoiseSpec",
                          "Piecewise random deformation of [0, 1] acting on response "
                          "quantiles; k_support must be symmetric, {0} is noiseless.")
        .def(py::init<>())
        .def_readwrite("segments", &NoiseSpec::segments)
        .def_readwrite("k_support", &NoiseSpec::k_support)
        .def("validate", &NoiseSpec::validate)
        .def_static("with_k_max", &NoiseSpec::with_k_max, py::arg("segments"),
                    py::arg("k_max"));

    py::class_<NoiseMapDraw>(m, "NoiseMapDraw",
                             "A realized noise map in closed form; fixes 0, 1 and "
                             "every breakpoint.")
        .def_readonly("breakpoints", &NoiseMapDraw::breakpoints)
        .def_readonly("ks", &NoiseMapDraw::ks)
        .def("__call__", &NoiseMapDraw::operator(), py::arg("x"))
        .def("sample_at",
             [](const NoiseMapDraw& d, const Grid& g) { return d.sample_at(shared(g)); },
             py::arg("grid"));

    m.def("draw_noise_map", &draw_noise_map, py::arg("rng"), py::arg("spec"));
    m.def("sample_beta_mixture",
          [](RngStream& rng, const BetaMixtureSpec& spec, const Grid& g) {
              return sample_beta_mixture(rng, spec, shared(g));
          },
          py::arg("rng"), py::arg("spec"), py::arg("grid"));
    m.def("sample_noise_map",
          [](RngStream& rng, const NoiseSpec& spec, const Grid& g) {
              return sample_noise_map(rng, spec, shared(g));
          },
          py::arg("rng"), py::arg("spec"), py::arg("grid"));
    m.def("sample_from_measure", &sample_from_measure, py::arg("rng"), py::arg("mu"),
          py::arg("n"), "Inverse-CDF sampling from a measure.");

    py::class_<SyntheticDataset>(m, "SyntheticDataset",
                                 "Generated dataset plus the ground truth that "
                                 "produced it.")
        .def_readonly("dataset", &SyntheticDataset::dataset)
        .def_readonly("true_map", &SyntheticDataset::true_map)
        .def_readonly("noise_maps", &SyntheticDataset::noise_maps)
        .def_readonly("seed", &SyntheticDataset::seed);

    m.def("generate_dataset", &generate_dataset, py::arg("seed"), py::arg("n_pairs"),
          py::arg("t0"), py::arg("mixture") = BetaMixtureSpec{},
          py::arg("noise") = NoiseSpec{}, py::arg("sample_count") = std::nullopt,
          "Draws predictors from the Beta mixture and builds responses by "
          "noise-then-regression pushforward; sample_count switches to kernel "
          "proxies built from that many draws per measure.");

    // --- diagnostics ------------------------------------------------------

    py::class_<ResidualSet>(m, "ResidualSet",
                            "Per-pair residual maps and their pointwise mean.")
        .def_readonly("residual_maps", &ResidualSet::residual_maps)
        .def_readonly("mean_residual", &ResidualSet::mean_residual)
        .def_readonly("per_pair_wd", &ResidualSet::per_pair_wd);

    m.def("residuals", &residuals, py::arg("fit"), py::arg("dataset"));
    m.def("error_to_truth", &error_to_truth, py::arg("fit"), py::arg("t0"),
          "Fit error against a known regression map, weighted by the empirical "
          "predictor average.");

    py::class_<GoodnessOfFit>(m, "GoodnessOfFit",
                              "Ranked per-pair fit quality and the validity "
                              "statistic (mean residual's distance from identity).")
        .def_readonly("worst_pairs", &GoodnessOfFit::worst_pairs)
        .def_readonly("validity_statistic", &GoodnessOfFit::validity_statistic);

    m.def("goodness_of_fit_report", &goodness_of_fit_report, py::arg("fit"),
          py::arg("dataset"));

    py::class_<ConvergenceConfig>(m, "ConvergenceConfig",
                                  "Monte Carlo study configuration; t0 fixes the "
                                  "grid for the whole study.")
        .def(py::init<MonotoneMap>(), py::arg("t0"))
        .def_readwrite("n_values", &ConvergenceConfig::n_values)
        .def_readwrite("N_values", &ConvergenceConfig::N_values)
        .def_readwrite("replications", &ConvergenceConfig::replications)
        .def_readwrite("seed", &ConvergenceConfig::seed)
        .def_readwrite("t0", &ConvergenceConfig::t0)
        .def_readwrite("mixture", &ConvergenceConfig::mixture)
        .def_readwrite("noise", &ConvergenceConfig::noise);

    py::class_<ConvergenceRow>(m, "ConvergenceRow")
        .def_readonly("n", &ConvergenceRow::n)
        .def_readonly("N", &ConvergenceRow::N)
        .def_readonly("replication", &ConvergenceRow::replication)
        .def_readonly("error", &ConvergenceRow::error)
        .def_readonly("wall_seconds", &ConvergenceRow::wall_seconds);

    py::class_<ConvergenceCell>(m, "ConvergenceCell")
        .def_readonly("n", &ConvergenceCell::n)
        .def_readonly("N", &ConvergenceCell::N)
        .def_readonly("median_error", &ConvergenceCell::median_error);

    py::class_<ConvergenceTable>(m, "ConvergenceTable",
                                 "Per-replication errors, per-cell medians, and the "
                                 "log-log slope over the fully observed column.")
        .def_readonly("rows", &ConvergenceTable::rows)
        .def_readonly("medians", &ConvergenceTable::medians)
        .def_readonly("slope", &ConvergenceTable::slope);

    m.def("convergence_study", &convergence_study, py::arg("config"),
          "Runs the generate/fit cycles on derived seeds; deterministic given the "
          "config.");
}
