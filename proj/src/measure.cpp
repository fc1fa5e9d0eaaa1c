#include "dodreg/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dodreg {

namespace {

double clamp(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

void check_quantile_vector(const Grid& g, const std::vector<double>& q) {
  if (q.size() != g.size())
    throw std::invalid_argument("measure: quantile vector length != grid size");
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (!std::isfinite(q[k]) || q[k] < g.omega_min() || q[k] > g.omega_max())
      throw std::invalid_argument("measure: quantile value outside domain");
    if (k > 0 && q[k] < q[k - 1])
      throw std::invalid_argument("measure: quantile vector not nondecreasing");
  }
}

}  // namespace

Measure::Measure(GridPtr grid, std::vector<double> quantiles)
    : grid_(std::move(grid)), q_(std::move(quantiles)) {
  if (!grid_) throw std::invalid_argument("measure: null grid");
  check_quantile_vector(*grid_, q_);
  const std::size_t m = q_.size();
  q_at_zero_ = std::max(grid_->omega_min(), q_[0] - 0.5 * (q_[1] - q_[0]));
  q_at_one_ =
      std::min(grid_->omega_max(), q_[m - 1] + 0.5 * (q_[m - 1] - q_[m - 2]));
}

double Measure::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("quantile: level outside [0,1]");
  const std::size_t m = q_.size();
  const double t = p * static_cast<double>(m) - 0.5;
  if (t <= 0.0) {
    // segment from (0, q_at_zero_) to (p_0, q_0); level spacing at the end
    // segments is half a regular step
    const double frac = p / grid_->level(0);
    return clamp(q_at_zero_ + frac * (q_[0] - q_at_zero_), q_at_zero_, q_[0]);
  }
  if (t >= static_cast<double>(m - 1)) {
    const double frac = (p - grid_->level(m - 1)) / (1.0 - grid_->level(m - 1));
    return clamp(q_[m - 1] + frac * (q_at_one_ - q_[m - 1]), q_[m - 1],
                 q_at_one_);
  }
  const auto k = static_cast<std::size_t>(t);
  const double frac = t - static_cast<double>(k);
  return clamp(q_[k] + frac * (q_[k + 1] - q_[k]), q_[k], q_[k + 1]);
}

double Measure::cdf(double x) const {
  if (!grid_->contains(x)) throw std::invalid_argument("cdf: out of domain");
  if (x < q_at_zero_) return 0.0;
  if (x >= q_at_one_) return 1.0;
  const std::size_t m = q_.size();
  // knots (P_i, Q_i): (0, q_at_zero_), (p_k, q_k) for k < m, (1, q_at_one_)
  auto knot_q = [&](std::size_t i) {
    if (i == 0) return q_at_zero_;
    if (i == m + 1) return q_at_one_;
    return q_[i - 1];
  };
  auto knot_p = [&](std::size_t i) {
    if (i == 0) return 0.0;
    if (i == m + 1) return 1.0;
    return grid_->level(i - 1);
  };
  // largest knot index with Q_i <= x; binary search over the interior run
  std::size_t lo = 0, hi = m + 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    if (knot_q(mid) <= x)
      lo = mid;
    else
      hi = mid - 1;
  }
  const double qa = knot_q(lo), qb = knot_q(lo + 1);
  const double pa = knot_p(lo), pb = knot_p(lo + 1);
  return clamp(pa + (x - qa) / (qb - qa) * (pb - pa), pa, pb);
}

bool Measure::is_absolutely_continuous() const {
  for (std::size_t k = 1; k < q_.size(); ++k)
    if (!(q_[k] > q_[k - 1])) return false;
  return true;
}

DensityCurve::DensityCurve(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), f_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("density: null grid");
  if (f_.size() != grid_->size())
    throw std::invalid_argument("density: value vector length != grid size");
  double total = 0.0;
  for (double v : f_) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("density: negative or non-finite value");
    total += v;
  }
  if (std::abs(grid_->cell_width() * total - 1.0) > 1e-9)
    throw std::invalid_argument("density: not normalized");
}

SampleSet::SampleSet(std::vector<double> values, double omega_min,
                     double omega_max)
    : v_(std::move(values)), lo_(omega_min), hi_(omega_max) {
  if (v_.empty()) throw std::invalid_argument("empty sample");
  for (double x : v_)
    if (!std::isfinite(x) || x < lo_ || x > hi_)
      throw std::invalid_argument("out of domain");
}

Measure measure_from_samples(const SampleSet& s, GridPtr grid) {
  for (double x : s.values())
    if (!grid->contains(x)) throw std::invalid_argument("out of domain");
  std::vector<double> sorted = s.values();
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const std::size_t m = grid->size();
  std::vector<double> q(m);
  for (std::size_t k = 0; k < m; ++k) {
    // type-1: smallest order statistic with ECDF >= p
    const double pos = std::ceil(grid->level(k) * static_cast<double>(n));
    const auto idx =
        static_cast<std::size_t>(clamp(pos, 1.0, static_cast<double>(n)));
    q[k] = sorted[idx - 1];
  }
  return Measure(std::move(grid), std::move(q));
}

namespace {

// Type-7 quantile of the expanded multiset (each value repeated its weight):
// linear interpolation between expanded order statistics.
double weighted_quantile7(const std::vector<double>& sorted_values,
                          const std::vector<double>& cumulative_weights,
                          double total, double p) {
  const double t = p * (total - 1.0);
  const double t0 = std::floor(t);
  auto value_at = [&](double expanded_index) {
    auto it = std::upper_bound(cumulative_weights.begin(),
                               cumulative_weights.end(), expanded_index);
    auto i = static_cast<std::size_t>(it - cumulative_weights.begin());
    if (i >= sorted_values.size()) i = sorted_values.size() - 1;
    return sorted_values[i];
  };
  const double a = value_at(t0);
  const double b = value_at(std::min(t0 + 1.0, total - 1.0));
  return a + (t - t0) * (b - a);
}

struct SortedWeighted {
  std::vector<double> values;   // ascending, unique not required
  std::vector<double> weights;  // positive
  std::vector<double> cumw;     // inclusive cumulative sums
  double total = 0.0;
};

SortedWeighted sort_weighted(const WeightedSamples& s) {
  if (s.values.size() != s.weights.size())
    throw std::invalid_argument("weighted samples: length mismatch");
  if (s.values.empty()) throw std::invalid_argument("empty sample");
  std::vector<std::size_t> order(s.values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.values[a] < s.values[b];
  });
  SortedWeighted out;
  out.values.reserve(order.size());
  out.weights.reserve(order.size());
  for (std::size_t i : order) {
    if (!(s.weights[i] > 0.0))
      throw std::invalid_argument("weighted samples: nonpositive weight");
    out.values.push_back(s.values[i]);
    out.weights.push_back(s.weights[i]);
  }
  out.cumw.resize(out.weights.size());
  double c = 0.0;
  for (std::size_t i = 0; i < out.weights.size(); ++i) {
    c += out.weights[i];
    out.cumw[i] = c;
  }
  out.total = c;
  return out;
}

double silverman_impl(const SortedWeighted& s) {
  const double n = s.total;
  if (n < 2.0) throw std::invalid_argument("silverman: need at least 2 samples");
  double mean = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i)
    mean += s.weights[i] * s.values[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double d = s.values[i] - mean;
    ss += s.weights[i] * d * d;
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  const double iqr = weighted_quantile7(s.values, s.cumw, n, 0.75) -
                     weighted_quantile7(s.values, s.cumw, n, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread == 0.0) spread = sd;  // heavy central ties; fall back to sd
  if (!(spread > 0.0)) throw std::invalid_argument("degenerate sample");
  return 0.9 * spread * std::pow(n, -0.2);
}

Measure kde_impl(const SortedWeighted& s, double bandwidth, GridPtr grid) {
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("bandwidth must be positive");
  const Grid& g = *grid;
  const std::size_t m = g.size();
  const double a = g.omega_min();
  const double h = g.cell_width();
  for (double v : s.values)
    if (v < a || v > g.omega_max()) throw std::invalid_argument("out of domain");

  // Linear binning onto the nodes keeps sub-cell placement information and
  // makes the convolution cost independent of the sample count.
  std::vector<double> bins(m, 0.0);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double t = (s.values[i] - a) / h - 0.5;
    const double w = s.weights[i];
    if (t <= 0.0) {
      bins[0] += w;
    } else if (t >= static_cast<double>(m - 1)) {
      bins[m - 1] += w;
    } else {
      const auto j = static_cast<std::size_t>(t);
      const double frac = t - static_cast<double>(j);
      bins[j] += w * (1.0 - frac);
      bins[j + 1] += w * frac;
    }
  }

  // Kernel values by node distance, truncated where the Gaussian tail is
  // negligible relative to every tolerance in use.
  const auto radius = std::min(
      m - 1, static_cast<std::size_t>(std::ceil(6.0 * bandwidth / h)));
  std::vector<double> kernel(radius + 1);
  for (std::size_t d = 0; d <= radius; ++d) {
    const double u = static_cast<double>(d) * h / bandwidth;
    kernel[d] = std::exp(-0.5 * u * u);
  }

  const auto mm = static_cast<std::ptrdiff_t>(m);
  const auto r = static_cast<std::ptrdiff_t>(radius);
  std::vector<double> f(m, 0.0);
  for (std::ptrdiff_t i = 0; i < mm; ++i) {
    const double w = bins[static_cast<std::size_t>(i)];
    if (w == 0.0) continue;
    const std::ptrdiff_t j0 = std::max<std::ptrdiff_t>(0, i - r);
    const std::ptrdiff_t j1 = std::min(mm - 1, i + r);
    for (std::ptrdiff_t j = j0; j <= j1; ++j)
      f[static_cast<std::size_t>(j)] += w * kernel[static_cast<std::size_t>(std::abs(j - i))];
    // reflection about omega_min: virtual source at node index -(i+1)
    if (i + 1 <= r) {
      const std::ptrdiff_t jmax = std::min(mm - 1, r - i - 1);
      for (std::ptrdiff_t j = 0; j <= jmax; ++j)
        f[static_cast<std::size_t>(j)] += w * kernel[static_cast<std::size_t>(j + i + 1)];
    }
    // reflection about omega_max: virtual source at node index 2m-1-i
    if ((mm - 1 - i) + 1 <= r) {
      const std::ptrdiff_t jmin = std::max<std::ptrdiff_t>(0, 2 * mm - 1 - i - r);
      for (std::ptrdiff_t j = jmin; j < mm; ++j)
        f[static_cast<std::size_t>(j)] += w * kernel[static_cast<std::size_t>(2 * mm - 1 - i - j)];
    }
  }

  double total = 0.0;
  for (double v : f) total += v;
  const double scale = 1.0 / (h * total);
  for (double& v : f) v *= scale;
  return density_to_measure(DensityCurve(std::move(grid), std::move(f)));
}

}  // namespace

double silverman_bandwidth(const SampleSet& s) {
  WeightedSamples w{s.values(), std::vector<double>(s.size(), 1.0)};
  return silverman_impl(sort_weighted(w));
}

double silverman_bandwidth(const WeightedSamples& s) {
  return silverman_impl(sort_weighted(s));
}

Measure kde_to_measure(const SampleSet& s, double bandwidth, GridPtr grid) {
  WeightedSamples w{s.values(), std::vector<double>(s.size(), 1.0)};
  return kde_impl(sort_weighted(w), bandwidth, std::move(grid));
}

Measure kde_to_measure(const WeightedSamples& s, double bandwidth,
                       GridPtr grid) {
  return kde_impl(sort_weighted(s), bandwidth, std::move(grid));
}

Measure density_to_measure(const DensityCurve& d) {
  const Grid& g = d.grid();
  const std::size_t m = g.size();
  const double h = g.cell_width();
  const std::vector<double>& f = d.values();

  // CDF knots at omega_min and at every cell right edge, normalized so the
  // last knot is exactly one.
  std::vector<double> cum(m);
  double c = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    c += f[j];
    cum[j] = c;
  }
  for (std::size_t j = 0; j < m; ++j) cum[j] /= c;

  std::vector<double> q(m);
  std::size_t j = 0;  // first cell with cum[j] >= p (two-pointer sweep)
  for (std::size_t k = 0; k < m; ++k) {
    const double p = g.level(k);
    while (j < m - 1 && cum[j] < p) ++j;
    const double c_lo = (j == 0) ? 0.0 : cum[j - 1];
    const double c_hi = cum[j];
    double x;
    if (c_hi > c_lo) {
      x = g.edge(j) + (p - c_lo) / (c_hi - c_lo) * h;
    } else {
      x = g.edge(j);  // flat stretch: left endpoint
    }
    q[k] = clamp(x, g.omega_min(), g.omega_max());
    if (k > 0 && q[k] < q[k - 1]) q[k] = q[k - 1];
  }
  return Measure(d.grid_ptr(), std::move(q));
}

DensityCurve measure_to_density(const Measure& mu) {
  if (mu.is_point_mass()) throw std::invalid_argument("density undefined");
  const Grid& g = mu.grid();
  std::vector<double> masses = cell_masses(mu);
  double total = 0.0;
  for (double w : masses) total += w;
  std::vector<double> f(masses.size());
  const double scale = 1.0 / (g.cell_width() * total);
  for (std::size_t j = 0; j < masses.size(); ++j) f[j] = masses[j] * scale;
  return DensityCurve(mu.grid_ptr(), std::move(f));
}

std::vector<double> cell_masses(const Measure& mu) {
  const Grid& g = mu.grid();
  const std::size_t m = g.size();
  std::vector<double> masses(m);
  // Interior edges only; anything at or below omega_min belongs to the first
  // cell and anything above the last interior edge to the last cell, so the
  // masses always sum to one.
  double prev = 0.0;
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double fj = mu.cdf(g.edge(j + 1));
    masses[j] = std::max(0.0, fj - prev);
    prev = fj;
  }
  masses[m - 1] = std::max(0.0, 1.0 - prev);
  return masses;
}

double wasserstein_distance(const Measure& mu, const Measure& nu) {
  require_same_grid(mu.grid(), nu.grid());
  const std::vector<double>& a = mu.quantiles();
  const std::vector<double>& b = nu.quantiles();
  double ss = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(a.size()));
}

}  // namespace dodreg
