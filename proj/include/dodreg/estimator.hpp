#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dodreg/measure.hpp"
#include "dodreg/transport.hpp"

namespace dodreg {

/// One regressor/response observation. Both measures live on one grid; when
/// the pair was built from raw data the original samples are retained.
struct RegressionPair {
  Measure predictor;
  Measure response;
  std::optional<SampleSet> predictor_samples;
  std::optional<SampleSet> response_samples;
};

class RegressionDataset {
 public:
  explicit RegressionDataset(std::vector<RegressionPair> pairs);

  const std::vector<RegressionPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  const Grid& grid() const { return pairs_.front().predictor.grid(); }
  const GridPtr& grid_ptr() const { return pairs_.front().predictor.grid_ptr(); }

 private:
  std::vector<RegressionPair> pairs_;
};

/// The node-pooled form of the Frechet sum of squares: per node j a pooled
/// target (the mass-weighted mean of the pairwise transport map values) and
/// the pooled mass. Pooling is exact for the quadratic objective.
struct IsotonicProblem {
  GridPtr grid;
  std::vector<double> pooled_targets;  // meaningful where covered
  std::vector<double> pooled_weights;
  std::vector<bool> coverage_mask;     // pooled weight > 0
};

/// Fitted regression map with its objective value and per-pair fit quality.
///
/// Note the monotone node parametrization implicitly bounds the fitted
/// slope by |Omega| / min_j |I_j|; no tighter derivative bound is enforced.
struct FitResult {
  MonotoneMap map;
  double objective;                  // empirical Frechet sum of squares / 2N
  std::vector<double> per_pair_wd;   // d_W(fitted response_i, response_i)
  std::vector<bool> coverage_mask;
  NodeWeights qn_weights;            // empirical average of the predictors
};

IsotonicProblem build_isotonic_problem(const RegressionDataset& d);

/// Minimizes sum_j weights_j * (targets_j - z_j)^2 over nondecreasing z by
/// pool-adjacent-violators. Zero-weight positions take the value forced by
/// the surrounding blocks, or the midpoint of the bracketing block values
/// when isolated between blocks.
std::vector<double> pava(std::span<const double> targets,
                         std::span<const double> weights);

/// Frechet least squares: pools the dataset into a weighted isotonic
/// problem, solves it, and interpolates across uncovered nodes.
FitResult fit(const RegressionDataset& d);

/// Fitted response for a (new or training) predictor.
Measure predict(const FitResult& f, const Measure& mu);

/// Empirical objective (1/2N) * sum_i d_W^2(t # mu_i, nu_i).
double objective(const MonotoneMap& t, const RegressionDataset& d);

}  // namespace dodreg
