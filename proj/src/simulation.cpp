#include "dodreg/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dodreg {

namespace {

void require_unit_grid(const Grid& g, const char* what) {
  if (g.omega_min() != 0.0 || g.omega_max() != 1.0)
    throw std::invalid_argument(std::string(what) +
                                ": grid domain must be [0,1]");
}

// Sample an analytic nondecreasing function at the nodes, clamping into the
// interval and flushing sub-ulp rounding wobble so the MonotoneMap
// invariants hold exactly.
template <typename F>
MonotoneMap node_sampled_map(GridPtr grid, F&& f) {
  const Grid& g = *grid;
  std::vector<double> z(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    double v = f(g.node(j));
    v = std::min(std::max(v, g.omega_min()), g.omega_max());
    if (j > 0 && v < z[j - 1]) v = z[j - 1];
    z[j] = v;
  }
  return MonotoneMap(std::move(grid), std::move(z));
}

}  // namespace

double zeta(int k, double x) {
  if (k == 0) return x;
  const double a = std::abs(static_cast<double>(k));
  // computed via |k| so that the k and -k terms cancel exactly in the
  // identity zeta_k + zeta_{-k} = 2x
  const double s = std::sin(std::numbers::pi * a * x) / (a * std::numbers::pi);
  return k > 0 ? x - s : x + s;
}

MonotoneMap zeta_map(int k, GridPtr grid) {
  if (grid->omega_min() < -1.0 || grid->omega_max() > 1.0)
    throw std::invalid_argument("zeta_map: grid interval must lie in [-1,1]");
  return node_sampled_map(std::move(grid),
                          [k](double x) { return zeta(k, x); });
}

void BetaMixtureSpec::validate() const {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0))
      throw std::invalid_argument("beta mixture: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("beta mixture: weights must sum to one");
  if (!(parameter_min > 0.0) || !(parameter_max >= parameter_min))
    throw std::invalid_argument("beta mixture: invalid parameter range");
}

void NoiseSpec::validate() const {
  if (segments < 2)
    throw std::invalid_argument("noise spec: need at least 2 segments");
  if (k_support.empty())
    throw std::invalid_argument("noise spec: empty k support");
  std::vector<int> sorted = k_support;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("noise spec: duplicate k value");
  for (int k : sorted)
    if (!std::binary_search(sorted.begin(), sorted.end(), -k))
      throw std::invalid_argument("noise spec: k support not symmetric");
}

NoiseSpec NoiseSpec::with_k_max(int segments, int k_max) {
  if (k_max < 0) throw std::invalid_argument("noise spec: negative k max");
  NoiseSpec spec;
  spec.segments = segments;
  spec.k_support.clear();
  if (k_max == 0) {
    spec.k_support.push_back(0);
  } else {
    for (int k = -k_max; k <= k_max; ++k)
      if (k != 0) spec.k_support.push_back(k);
  }
  spec.validate();
  return spec;
}

double NoiseMapDraw::operator()(double x) const {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument("noise map: argument outside [0,1]");
  // largest j with breakpoints[j] <= x, capped at the last segment
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  std::size_t j = static_cast<std::size_t>(it - breakpoints.begin());
  j = (j == 0) ? 0 : j - 1;
  if (j >= ks.size()) j = ks.size() - 1;
  const double a = breakpoints[j];
  const double b = breakpoints[j + 1];
  if (!(b > a)) return x;    // degenerate segment: x is a fixed breakpoint
  if (ks[j] == 0) return x;  // flat distortion: exact identity, no rescaling
  double u = (2.0 * x - (a + b)) / (b - a);
  u = std::min(std::max(u, -1.0), 1.0);
  return 0.5 * (b - a) * zeta(ks[j], u) + 0.5 * (a + b);
}

MonotoneMap NoiseMapDraw::sample_at(GridPtr grid) const {
  require_unit_grid(*grid, "noise map");
  return node_sampled_map(std::move(grid),
                          [this](double x) { return (*this)(x); });
}

NoiseMapDraw draw_noise_map(RngStream& rng, const NoiseSpec& spec) {
  spec.validate();
  const auto j_count = static_cast<std::size_t>(spec.segments);
  NoiseMapDraw d;
  d.breakpoints.resize(j_count + 1);
  d.breakpoints.front() = 0.0;
  d.breakpoints.back() = 1.0;
  for (std::size_t j = 1; j < j_count; ++j) d.breakpoints[j] = rng.uniform();
  std::sort(d.breakpoints.begin(), d.breakpoints.end());
  d.ks.resize(j_count);
  const auto top = static_cast<long>(spec.k_support.size()) - 1;
  for (std::size_t j = 0; j < j_count; ++j)
    d.ks[j] = spec.k_support[static_cast<std::size_t>(rng.uniform_int(0, top))];
  return d;
}

Measure sample_beta_mixture(RngStream& rng, const BetaMixtureSpec& spec,
                            GridPtr grid) {
  spec.validate();
  require_unit_grid(*grid, "beta mixture");
  const Grid& g = *grid;
  const std::size_t m = g.size();

  // Fixed draw order (alpha_1, beta_1, ..., alpha_3, beta_3), consumed even
  // for zero-weight components, so the stream layout does not depend on the
  // weights.
  std::array<double, 3> alpha{}, beta{};
  for (std::size_t c = 0; c < 3; ++c) {
    alpha[c] = rng.uniform(spec.parameter_min, spec.parameter_max);
    beta[c] = rng.uniform(spec.parameter_min, spec.parameter_max);
  }

  std::vector<double> log_x(m), log_1mx(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double x = g.node(j);
    log_x[j] = std::log(x);
    log_1mx[j] = std::log1p(-x);
  }

  std::vector<double> f(m, 0.0);
  for (std::size_t c = 0; c < 3; ++c) {
    if (spec.weights[c] == 0.0) continue;
    const double a = alpha[c], b = beta[c];
    const double log_norm =
        std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    for (std::size_t j = 0; j < m; ++j)
      f[j] += spec.weights[c] *
              std::exp((a - 1.0) * log_x[j] + (b - 1.0) * log_1mx[j] - log_norm);
  }

  double total = 0.0;
  for (double v : f) total += v;
  const double scale = 1.0 / (g.cell_width() * total);
  for (double& v : f) v *= scale;
  return density_to_measure(DensityCurve(std::move(grid), std::move(f)));
}

MonotoneMap sample_noise_map(RngStream& rng, const NoiseSpec& spec,
                             GridPtr grid) {
  require_unit_grid(*grid, "noise map");
  return draw_noise_map(rng, spec).sample_at(std::move(grid));
}

SampleSet sample_from_measure(RngStream& rng, const Measure& mu,
                              std::size_t n) {
  if (n < 1) throw std::invalid_argument("sample_from_measure: need n >= 1");
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = mu.quantile(rng.uniform());
  return SampleSet(std::move(values), mu.grid().omega_min(),
                   mu.grid().omega_max());
}

SyntheticDataset generate_dataset(std::uint64_t seed, std::size_t n_pairs,
                                  const MonotoneMap& t0,
                                  const BetaMixtureSpec& mixture,
                                  const NoiseSpec& noise,
                                  std::optional<std::size_t> sample_count) {
  if (n_pairs < 1)
    throw std::invalid_argument("generate_dataset: need at least one pair");
  if (sample_count && *sample_count < 2)
    throw std::invalid_argument("generate_dataset: need sample count >= 2");
  const GridPtr grid = t0.grid_ptr();
  require_unit_grid(*grid, "generate_dataset");

  std::vector<RegressionPair> pairs;
  std::vector<MonotoneMap> noise_maps;
  pairs.reserve(n_pairs);
  noise_maps.reserve(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    RngStream rng(seed, i);
    Measure mu = sample_beta_mixture(rng, mixture, grid);
    const NoiseMapDraw draw = draw_noise_map(rng, noise);
    MonotoneMap t_eps = draw.sample_at(grid);
    // Apply the distortion to the quantiles analytically rather than through
    // the node-sampled map: this avoids the constant extension beyond the
    // first/last node, so a flat distortion reproduces t0 # mu exactly.
    Measure t0mu = pushforward(t0, mu);
    std::vector<double> qn(t0mu.quantiles());
    double prev = 0.0;
    for (auto& v : qn) {
      v = std::min(std::max(draw(v), 0.0), 1.0);
      v = prev = std::max(v, prev);
    }
    Measure nu(grid, std::move(qn));
    if (sample_count) {
      SampleSet mu_samples = sample_from_measure(rng, mu, *sample_count);
      SampleSet nu_samples = sample_from_measure(rng, nu, *sample_count);
      Measure mu_proxy =
          kde_to_measure(mu_samples, silverman_bandwidth(mu_samples), grid);
      Measure nu_proxy =
          kde_to_measure(nu_samples, silverman_bandwidth(nu_samples), grid);
      pairs.push_back(RegressionPair{std::move(mu_proxy), std::move(nu_proxy),
                                     std::move(mu_samples),
                                     std::move(nu_samples)});
    } else {
      pairs.push_back(
          RegressionPair{std::move(mu), std::move(nu), {}, {}});
    }
    noise_maps.push_back(std::move(t_eps));
  }
  return SyntheticDataset{RegressionDataset(std::move(pairs)), t0,
                          std::move(noise_maps), seed};
}

}  // namespace dodreg
