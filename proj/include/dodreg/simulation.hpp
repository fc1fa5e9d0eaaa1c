#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "dodreg/estimator.hpp"
#include "dodreg/rng.hpp"
#include "dodreg/transport.hpp"

namespace dodreg {

/// Smooth monotone deformation zeta_k(x) = x - sin(pi k x)/(|k| pi) on
/// [-1, 1], with zeta_0 the identity. Fixes -1, 0 and 1 for every k, and
/// zeta_k + zeta_{-k} = 2 * identity exactly.
double zeta(int k, double x);

/// zeta_k sampled at the grid nodes; the grid interval must lie in [-1, 1].
MonotoneMap zeta_map(int k, GridPtr grid);

/// Random three-component Beta mixture. Component shape parameters are
/// drawn uniformly from [parameter_min, parameter_max]; the component
/// weights are taken as given, not drawn.
struct BetaMixtureSpec {
  std::array<double, 3> weights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  double parameter_min = 1.0;
  double parameter_max = 10.0;

  void validate() const;
};

/// Piecewise random deformation of [0, 1]: the interval is split at uniform
/// order statistics into `segments` pieces and each piece is deformed by a
/// rescaled zeta_K, with K drawn uniformly from k_support.
struct NoiseSpec {
  int segments = 4;
  /// Must be symmetric (k present iff -k is) so the maps average to the
  /// identity; {0} gives identity (noiseless) maps.
  std::vector<int> k_support{-3, -2, -1, 1, 2, 3};

  void validate() const;

  /// Support {-k_max, ..., -1, 1, ..., k_max}, or {0} when k_max == 0.
  static NoiseSpec with_k_max(int segments, int k_max);
};

/// A realized noise map in closed form, exact anywhere in [0, 1]: fixes 0,
/// 1 and every interior breakpoint. sample_at gives its grid restriction.
struct NoiseMapDraw {
  std::vector<double> breakpoints;  // 0 = b_0 <= ... <= b_J = 1
  std::vector<int> ks;              // one per segment

  double operator()(double x) const;
  MonotoneMap sample_at(GridPtr grid) const;
};

NoiseMapDraw draw_noise_map(RngStream& rng, const NoiseSpec& spec);

Measure sample_beta_mixture(RngStream& rng, const BetaMixtureSpec& spec,
                            GridPtr grid);

MonotoneMap sample_noise_map(RngStream& rng, const NoiseSpec& spec,
                             GridPtr grid);

/// Inverse-CDF sampling: the measure's quantile function applied to n
/// uniform draws.
SampleSet sample_from_measure(RngStream& rng, const Measure& mu,
                              std::size_t n);

/// A generated dataset together with the ground truth that produced it.
struct SyntheticDataset {
  RegressionDataset dataset;
  MonotoneMap true_map;
  std::vector<MonotoneMap> noise_maps;
  std::uint64_t seed;
};

/// Draws N predictor measures and noise maps and builds each response as
/// the noise-then-regression pushforward of its predictor. When
/// sample_count is set, each measure is replaced by a kernel proxy built
/// from that many inverse-CDF draws (the raw samples are kept on the
/// pairs), so fitting follows the same path as for real sampled data.
///
/// Observation i consumes only the substream (seed, i), so generation
/// order is immaterial and datasets are reproducible.
SyntheticDataset generate_dataset(std::uint64_t seed, std::size_t n_pairs,
                                  const MonotoneMap& t0,
                                  const BetaMixtureSpec& mixture,
                                  const NoiseSpec& noise,
                                  std::optional<std::size_t> sample_count);

}  // namespace dodreg
