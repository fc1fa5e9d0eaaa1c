#include "dodreg/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dodreg {

namespace {

void check_map_values(const Grid& g, const std::vector<double>& z) {
  if (z.size() != g.size())
    throw std::invalid_argument("map: value vector length != grid size");
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!std::isfinite(z[j]) || z[j] < g.omega_min() || z[j] > g.omega_max())
      throw std::invalid_argument("map: value outside domain");
    if (j > 0 && z[j] < z[j - 1])
      throw std::invalid_argument("map: values not nondecreasing");
  }
}

}  // namespace

MonotoneMap::MonotoneMap(GridPtr grid, std::vector<double> values)
    : MonotoneMap(std::move(grid), std::move(values),
                  std::vector<bool>()) {}

MonotoneMap::MonotoneMap(GridPtr grid, std::vector<double> values,
                         std::vector<bool> defined_mask)
    : grid_(std::move(grid)), z_(std::move(values)), mask_(std::move(defined_mask)) {
  if (!grid_) throw std::invalid_argument("map: null grid");
  check_map_values(*grid_, z_);
  if (mask_.empty()) mask_.assign(z_.size(), true);
  if (mask_.size() != z_.size())
    throw std::invalid_argument("map: mask length != grid size");
}

double MonotoneMap::operator()(double x) const {
  if (!grid_->contains(x))
    throw std::invalid_argument("map evaluation: out of domain");
  const Grid& g = *grid_;
  const std::size_t m = z_.size();
  const double t = (x - g.omega_min()) / g.cell_width() - 0.5;
  if (t <= 0.0) return z_[0];
  if (t >= static_cast<double>(m - 1)) return z_[m - 1];
  const auto j = static_cast<std::size_t>(t);
  const double frac = t - static_cast<double>(j);
  const double v = z_[j] + frac * (z_[j + 1] - z_[j]);
  return std::min(std::max(v, z_[j]), z_[j + 1]);
}

NodeWeights::NodeWeights(GridPtr grid, std::vector<double> weights)
    : grid_(std::move(grid)), w_(std::move(weights)) {
  if (!grid_) throw std::invalid_argument("weights: null grid");
  if (w_.size() != grid_->size())
    throw std::invalid_argument("weights: vector length != grid size");
  double total = 0.0;
  for (double w : w_) {
    if (!std::isfinite(w) || w < 0.0)
      throw std::invalid_argument("weights: negative or non-finite value");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("weights: must sum to one");
}

MonotoneMap fill_undefined_nodes(GridPtr grid, const std::vector<double>& values,
                                 const std::vector<bool>& defined) {
  const std::size_t m = values.size();
  if (defined.size() != m)
    throw std::invalid_argument("fill: mask length mismatch");
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < m; ++j)
    if (defined[j]) idx.push_back(j);
  if (idx.empty()) throw std::invalid_argument("fill: no defined nodes");

  std::vector<double> z(m);
  for (std::size_t j = 0; j <= idx.front(); ++j) z[j] = values[idx.front()];
  for (std::size_t j = idx.back(); j < m; ++j) z[j] = values[idx.back()];
  for (std::size_t s = 0; s + 1 < idx.size(); ++s) {
    const std::size_t a = idx[s], b = idx[s + 1];
    z[a] = values[a];
    const double xa = grid->node(a), xb = grid->node(b);
    for (std::size_t j = a + 1; j < b; ++j) {
      const double frac = (grid->node(j) - xa) / (xb - xa);
      const double v = values[a] + frac * (values[b] - values[a]);
      z[j] = std::min(std::max(v, values[a]), values[b]);
    }
  }
  return MonotoneMap(std::move(grid), std::move(z), defined);
}

MonotoneMap optimal_map(const Measure& mu, const Measure& nu) {
  require_same_grid(mu.grid(), nu.grid());
  const Grid& g = mu.grid();
  const std::size_t m = g.size();
  const std::vector<double> masses = cell_masses(mu);
  std::vector<double> z(m, 0.0);
  std::vector<bool> defined(m);
  for (std::size_t j = 0; j < m; ++j) {
    defined[j] = masses[j] > 0.0;
    if (defined[j]) z[j] = nu.quantile(mu.cdf(g.node(j)));
  }
  return fill_undefined_nodes(mu.grid_ptr(), z, defined);
}

Measure pushforward(const MonotoneMap& t, const Measure& mu) {
  require_same_grid(t.grid(), mu.grid());
  const std::vector<double>& q = mu.quantiles();
  std::vector<double> out(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) out[k] = t(q[k]);
  return Measure(mu.grid_ptr(), std::move(out));
}

MonotoneMap compose(const MonotoneMap& outer, const MonotoneMap& inner) {
  require_same_grid(outer.grid(), inner.grid());
  const Grid& g = inner.grid();
  std::vector<double> z(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) z[j] = outer(inner(g.node(j)));
  return MonotoneMap(inner.grid_ptr(), std::move(z));
}

MonotoneMap identity_map(GridPtr grid) {
  std::vector<double> z = grid->nodes();
  return MonotoneMap(std::move(grid), std::move(z));
}

double map_l2_distance(const MonotoneMap& a, const MonotoneMap& b,
                       const NodeWeights& w) {
  require_same_grid(a.grid(), b.grid());
  require_same_grid(a.grid(), w.grid());
  const std::vector<double>& za = a.values();
  const std::vector<double>& zb = b.values();
  const std::vector<double>& wt = w.weights();
  double ss = 0.0;
  for (std::size_t j = 0; j < za.size(); ++j) {
    const double d = za[j] - zb[j];
    ss += wt[j] * d * d;
  }
  return std::sqrt(ss);
}

NodeWeights node_weights_of(const Measure& mu) {
  return NodeWeights(mu.grid_ptr(), cell_masses(mu));
}

}  // namespace dodreg
