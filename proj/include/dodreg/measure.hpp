#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "dodreg/grid.hpp"

namespace dodreg {

/// A probability measure on the grid's interval, stored canonically as the
/// vector of quantile values F^{-1}(p_k) at the grid's probability levels.
///
/// The continuous quantile function is the piecewise-linear interpolant of
/// the stored values, extended to p = 0 and p = 1 by extrapolating the first
/// and last segment (clamped into Omega). The CDF is its right-continuous
/// generalized inverse. Densities and CDFs are derived views; the quantile
/// vector is authoritative.
class Measure {
 public:
  Measure(GridPtr grid, std::vector<double> quantiles);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<double>& quantiles() const { return q_; }

  /// Piecewise-linear quantile function, p in [0, 1].
  double quantile(double p) const;

  /// Right-continuous CDF, x in Omega. Flat quantile stretches (atoms)
  /// map to the top of their jump.
  double cdf(double x) const;

  bool is_point_mass() const { return q_.front() == q_.back(); }

  /// True when the quantile vector is strictly increasing, i.e. the measure
  /// carries no atom at the stored resolution.
  bool is_absolutely_continuous() const;

 private:
  GridPtr grid_;
  std::vector<double> q_;
  double q_at_zero_;  // extrapolated quantile at p = 0
  double q_at_one_;   // extrapolated quantile at p = 1
};

/// Nonnegative density values at the grid nodes, normalized so that the
/// midpoint rule integrates to one.
class DensityCurve {
 public:
  DensityCurve(GridPtr grid, std::vector<double> values);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<double>& values() const { return f_; }

 private:
  GridPtr grid_;
  std::vector<double> f_;
};

/// Raw observations, all inside a stated interval.
class SampleSet {
 public:
  SampleSet(std::vector<double> values, double omega_min, double omega_max);

  const std::vector<double>& values() const { return v_; }
  std::size_t size() const { return v_.size(); }
  double omega_min() const { return lo_; }
  double omega_max() const { return hi_; }

 private:
  std::vector<double> v_;
  double lo_;
  double hi_;
};

/// Point set with positive multiplicities, the expansion-free form of count
/// data. Semantically equivalent to repeating each value weight-many times.
struct WeightedSamples {
  std::vector<double> values;
  std::vector<double> weights;
};

/// Empirical measure of a sample set: type-1 (left-continuous inverse)
/// quantiles at the grid levels.
Measure measure_from_samples(const SampleSet& s, GridPtr grid);

/// Rule-of-thumb kernel bandwidth 0.9 * min(sd, IQR/1.34) * n^{-1/5}.
double silverman_bandwidth(const SampleSet& s);
double silverman_bandwidth(const WeightedSamples& s);

/// Gaussian kernel density estimate with boundary reflection at both
/// endpoints, evaluated at the grid nodes and converted to a measure.
Measure kde_to_measure(const SampleSet& s, double bandwidth, GridPtr grid);
Measure kde_to_measure(const WeightedSamples& s, double bandwidth, GridPtr grid);

/// Quantiles of a density: midpoint-rule CDF at cell right edges, extended
/// piecewise-linearly, inverted at the grid levels. Flat CDF stretches
/// invert to their left endpoint.
Measure density_to_measure(const DensityCurve& d);

/// Density view of a measure: cell masses of the implied piecewise-linear
/// CDF divided by the cell width, renormalized.
DensityCurve measure_to_density(const Measure& mu);

/// Mass the measure assigns to each grid cell; sums to one.
std::vector<double> cell_masses(const Measure& mu);

/// Discretized 2-Wasserstein distance: the root-mean-square difference of
/// the two quantile vectors.
double wasserstein_distance(const Measure& mu, const Measure& nu);

}  // namespace dodreg
