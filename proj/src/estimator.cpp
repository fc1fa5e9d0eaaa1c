#include "dodreg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dodreg {

RegressionDataset::RegressionDataset(std::vector<RegressionPair> pairs)
    : pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw std::invalid_argument("dataset: no pairs");
  const Grid& g = pairs_.front().predictor.grid();
  for (const RegressionPair& p : pairs_) {
    require_same_grid(p.predictor.grid(), g);
    require_same_grid(p.response.grid(), g);
  }
}

IsotonicProblem build_isotonic_problem(const RegressionDataset& d) {
  const Grid& g = d.grid();
  const std::size_t m = g.size();
  std::vector<double> wsum(m, 0.0);
  std::vector<double> wysum(m, 0.0);
  for (const RegressionPair& pair : d.pairs()) {
    if (!pair.predictor.is_absolutely_continuous())
      throw std::invalid_argument("predictor not absolutely continuous");
    const std::vector<double> w = cell_masses(pair.predictor);
    const MonotoneMap t = optimal_map(pair.predictor, pair.response);
    const std::vector<double>& y = t.values();
    for (std::size_t j = 0; j < m; ++j) {
      wsum[j] += w[j];
      wysum[j] += w[j] * y[j];
    }
  }
  IsotonicProblem prob;
  prob.grid = d.grid_ptr();
  prob.pooled_weights = std::move(wsum);
  prob.pooled_targets.assign(m, 0.0);
  prob.coverage_mask.assign(m, false);
  for (std::size_t j = 0; j < m; ++j) {
    if (prob.pooled_weights[j] > 0.0) {
      prob.coverage_mask[j] = true;
      prob.pooled_targets[j] = wysum[j] / prob.pooled_weights[j];
    }
  }
  return prob;
}

std::vector<double> pava(std::span<const double> targets,
                         std::span<const double> weights) {
  const std::size_t m = targets.size();
  if (weights.size() != m)
    throw std::invalid_argument("pava: length mismatch");
  std::vector<std::size_t> active;  // indices with positive weight
  for (std::size_t j = 0; j < m; ++j) {
    if (weights[j] < 0.0) throw std::invalid_argument("pava: negative weight");
    if (weights[j] > 0.0) active.push_back(j);
  }
  if (active.empty()) throw std::invalid_argument("pava: all weights zero");

  // Blocks over the active subsequence; each holds a weighted mean.
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(active.size());
  for (std::size_t j : active) {
    Block b{targets[j], weights[j], 1};
    while (!blocks.empty() && blocks.back().mean >= b.mean) {
      const Block& prev = blocks.back();
      const double w = prev.weight + b.weight;
      b = Block{(prev.mean * prev.weight + b.mean * b.weight) / w, w,
                prev.count + b.count};
      blocks.pop_back();
    }
    blocks.push_back(b);
  }

  std::vector<double> solved(active.size());
  std::size_t pos = 0;
  for (const Block& b : blocks)
    for (std::size_t c = 0; c < b.count; ++c) solved[pos++] = b.mean;

  // Scatter back; zero-weight runs get the bracketing midpoint (interior)
  // or the nearest solved value (ends).
  std::vector<double> z(m);
  for (std::size_t s = 0; s < active.size(); ++s) z[active[s]] = solved[s];
  for (std::size_t j = 0; j < active.front(); ++j) z[j] = solved.front();
  for (std::size_t j = active.back() + 1; j < m; ++j) z[j] = solved.back();
  for (std::size_t s = 0; s + 1 < active.size(); ++s) {
    const double mid = 0.5 * (solved[s] + solved[s + 1]);
    for (std::size_t j = active[s] + 1; j < active[s + 1]; ++j) z[j] = mid;
  }
  return z;
}

FitResult fit(const RegressionDataset& d) {
  const IsotonicProblem prob = build_isotonic_problem(d);
  const Grid& g = *prob.grid;
  const std::size_t m = g.size();
  const auto n_pairs = static_cast<double>(d.size());

  std::vector<double> z = pava(prob.pooled_targets, prob.pooled_weights);
  for (double& v : z)
    v = std::min(std::max(v, g.omega_min()), g.omega_max());
  MonotoneMap map = fill_undefined_nodes(prob.grid, z, prob.coverage_mask);

  std::vector<double> qn(m);
  for (std::size_t j = 0; j < m; ++j)
    qn[j] = prob.pooled_weights[j] / n_pairs;
  NodeWeights qn_weights(prob.grid, std::move(qn));

  std::vector<double> per_pair_wd;
  per_pair_wd.reserve(d.size());
  double obj = 0.0;
  for (const RegressionPair& pair : d.pairs()) {
    const double wd =
        wasserstein_distance(pushforward(map, pair.predictor), pair.response);
    per_pair_wd.push_back(wd);
    obj += wd * wd;
  }
  obj /= 2.0 * n_pairs;

  return FitResult{std::move(map), obj, std::move(per_pair_wd),
                   prob.coverage_mask, std::move(qn_weights)};
}

Measure predict(const FitResult& f, const Measure& mu) {
  return pushforward(f.map, mu);
}

double objective(const MonotoneMap& t, const RegressionDataset& d) {
  double obj = 0.0;
  for (const RegressionPair& pair : d.pairs()) {
    const double wd =
        wasserstein_distance(pushforward(t, pair.predictor), pair.response);
    obj += wd * wd;
  }
  return obj / (2.0 * static_cast<double>(d.size()));
}

}  // namespace dodreg
