#pragma once

#include <vector>

#include "dodreg/grid.hpp"
#include "dodreg/measure.hpp"

namespace dodreg {

/// A nondecreasing map Omega -> Omega stored by its values at the grid
/// nodes and evaluated by piecewise-linear interpolation (constant beyond
/// the extreme nodes, so the range stays inside Omega).
///
/// The defined mask records which node values are data-determined; nodes a
/// source measure puts no mass on are filled by monotone interpolation and
/// flagged false, so diagnostics can exclude extrapolated regions.
class MonotoneMap {
 public:
  MonotoneMap(GridPtr grid, std::vector<double> values);
  MonotoneMap(GridPtr grid, std::vector<double> values,
              std::vector<bool> defined_mask);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<double>& values() const { return z_; }
  const std::vector<bool>& defined_mask() const { return mask_; }

  /// Piecewise-linear evaluation; x must lie in Omega.
  double operator()(double x) const;

 private:
  GridPtr grid_;
  std::vector<double> z_;
  std::vector<bool> mask_;
};

/// A discretized measure on Omega used as integration weights (for example
/// the empirical average Q_N of the predictor measures).
class NodeWeights {
 public:
  NodeWeights(GridPtr grid, std::vector<double> weights);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<double>& weights() const { return w_; }

 private:
  GridPtr grid_;
  std::vector<double> w_;
};

/// Fills undefined node positions by linear interpolation between the
/// nearest defined neighbours (constant extension at the ends) and returns
/// the completed map. At least one position must be defined.
MonotoneMap fill_undefined_nodes(GridPtr grid, const std::vector<double>& values,
                                 const std::vector<bool>& defined);

/// Closed-form 1D optimal transport map from mu to nu: the composition of
/// nu's quantile function with mu's CDF, sampled at the grid nodes. Nodes in
/// cells carrying no mu-mass are interpolation-filled and masked out.
MonotoneMap optimal_map(const Measure& mu, const Measure& nu);

/// Law of t(X) for X ~ mu: applies the map to every quantile value.
Measure pushforward(const MonotoneMap& t, const Measure& mu);

MonotoneMap compose(const MonotoneMap& outer, const MonotoneMap& inner);

MonotoneMap identity_map(GridPtr grid);

/// Weighted L2 distance between two maps' node values.
double map_l2_distance(const MonotoneMap& a, const MonotoneMap& b,
                       const NodeWeights& w);

/// Cell masses of a measure packaged as integration weights.
NodeWeights node_weights_of(const Measure& mu);

}  // namespace dodreg
