#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dodreg/estimator.hpp"
#include "dodreg/simulation.hpp"

namespace dodreg {

/// Per-pair residual transport maps (fitted response to observed response)
/// and their pointwise average. A residual close to the identity means the
/// pair is explained by the fitted map; the mean close to the identity is
/// the model-validity check.
struct ResidualSet {
  std::vector<MonotoneMap> residual_maps;
  MonotoneMap mean_residual;
  std::vector<double> per_pair_wd;  // d_W(fitted response_i, response_i)
};

ResidualSet residuals(const FitResult& f, const RegressionDataset& d);

/// Fit error against a known regression map, weighted by the fit's
/// empirical predictor average.
double error_to_truth(const FitResult& f, const MonotoneMap& t0);

/// Ranked per-pair fit quality plus the validity statistic (distance of
/// the mean residual from the identity, weighted like the fit error).
struct GoodnessOfFit {
  std::vector<std::pair<std::size_t, double>> worst_pairs;  // wd descending
  double validity_statistic;
};

GoodnessOfFit goodness_of_fit_report(const FitResult& f,
                                     const RegressionDataset& d);

/// Monte Carlo study of fit error versus dataset size N and per-measure
/// sample count n (nullopt = fully observed measures).
struct ConvergenceConfig {
  explicit ConvergenceConfig(MonotoneMap true_map) : t0(std::move(true_map)) {}

  std::vector<std::optional<int>> n_values{std::nullopt};
  std::vector<int> N_values;
  int replications = 1;
  std::uint64_t seed = 1;
  MonotoneMap t0;  // also fixes the grid for the whole study
  BetaMixtureSpec mixture;
  NoiseSpec noise;
};

struct ConvergenceRow {
  std::optional<int> n;
  int N;
  int replication;
  double error;  // fit error to t0 in the weighted L2 sense
  double wall_seconds;
};

struct ConvergenceCell {
  std::optional<int> n;
  int N;
  double median_error;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;        // ordered by (n, N, replication)
  std::vector<ConvergenceCell> medians;    // ordered by (n, N)
  /// Least-squares slope of log median error against log N over the fully
  /// observed column; absent without at least two usable cells.
  std::optional<double> slope;
};

/// Runs |n_values| * |N_values| * replications independent generate/fit
/// cycles on derived seeds. Deterministic given the config.
ConvergenceTable convergence_study(const ConvergenceConfig& cfg);

}  // namespace dodreg
